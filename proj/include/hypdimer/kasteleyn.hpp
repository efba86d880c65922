#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/temperley.hpp"

namespace hypdimer {

using cd = std::complex<double>;

// A Ḡ edge as a (white, black) pair of superposition ids.
struct DimerEdge {
  int white;
  int black;
  bool operator==(const DimerEdge&) const = default;
  auto operator<=>(const DimerEdge&) const = default;
};

enum class DiracVariant { raw, normalized };

// ∂̄ (or D̄ = S∂̄ with S(w,w) = 1/√(ν ν⁺)) restricted to a region; rows are the
// region's whites and columns its blacks in local order.
struct DiracMatrix {
  const Region* region = nullptr;
  DiracVariant variant = DiracVariant::raw;
  Eigen::MatrixXcd M;
  std::vector<double> scale;  // S per local white

  cd at(int w, int b) const { return M(region->white_index[w], region->black_index[b]); }
};

// Unsigned Kasteleyn entry before normalization.
inline cd dirac_entry(const SuperpositionGraph& sg, int w, int b) {
  Point d = sg.black_pos[b] - sg.white_pos[w];
  double len = std::abs(d);
  if (!(len > 1e-300)) throw LinearAlgebraError("zero-length superposition edge at white " + std::to_string(w));
  return sg.weight(w, b) * d / len;
}

// Worst violation of the face condition -∂̄(w1,f)∂̄(w2,v) / (∂̄(w2,f)∂̄(w1,v)) > 0
// over quads, reported as |arg| (0 when every ratio is a positive real).
inline double face_sign_defect(const SuperpositionGraph& sg, const std::vector<int>& quad_ids) {
  double worst = 0.0;
  for (int q : quad_ids) {
    const auto& Q = sg.quads[q];
    cd ratio = -dirac_entry(sg, Q.w1, Q.f) * dirac_entry(sg, Q.w2, Q.v) /
               (dirac_entry(sg, Q.w2, Q.f) * dirac_entry(sg, Q.w1, Q.v));
    worst = std::max(worst, std::abs(std::arg(ratio)));
  }
  return worst;
}

inline double face_sign_defect(const SuperpositionGraph& sg) {
  std::vector<int> all(sg.quads.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return face_sign_defect(sg, all);
}

inline DiracMatrix build_dirac(const Region& r, DiracVariant variant = DiracVariant::raw, double sign_tol = 1e-7) {
  const auto& sg = *r.sg;
  DiracMatrix D;
  D.region = &r;
  D.variant = variant;
  const int nw = static_cast<int>(r.whites.size()), nb = static_cast<int>(r.blacks.size());
  D.M = Eigen::MatrixXcd::Zero(nw, nb);
  D.scale.assign(nw, 1.0);
  for (int i = 0; i < nw; ++i) {
    int w = r.whites[i];
    if (variant == DiracVariant::normalized)
      D.scale[i] = 1.0 / std::sqrt(sg.base().nu[w] * sg.base().nu_dual[w]);
    for (int b : r.neighbors(w)) D.M(i, r.black_index[b]) = D.scale[i] * dirac_entry(sg, w, b);
  }
  std::vector<int> inside;
  for (std::size_t q = 0; q < sg.quads.size(); ++q)
    if (r.quad_inside(static_cast<int>(q))) inside.push_back(static_cast<int>(q));
  double defect = face_sign_defect(sg, inside);
  if (defect > sign_tol) throw InvariantError("face condition fails (phase defect " + std::to_string(defect) + ")");
  return D;
}

// Dense LU of a square Dirac matrix with log-magnitude determinant.
class DiracSolver {
 public:
  explicit DiracSolver(const Eigen::MatrixXcd& M) : n_(M.rows()) {
    if (M.rows() != M.cols()) throw LinearAlgebraError("Dirac matrix is not square");
    if (n_ == 0) return;
    lu_.compute(M);
    rcond_ = lu_.rcond();
    const auto& U = lu_.matrixLU();
    for (Eigen::Index i = 0; i < n_; ++i) {
      double a = std::abs(U(i, i));
      if (a == 0.0) {
        log_abs_det_ = -std::numeric_limits<double>::infinity();
        break;
      }
      log_abs_det_ += std::log(a);
    }
  }

  double log_abs_det() const { return log_abs_det_; }
  double abs_det() const { return std::exp(log_abs_det_); }
  double rcond() const { return rcond_; }
  bool singular() const { return n_ > 0 && (!(rcond_ > 1e-14) || !std::isfinite(log_abs_det_)); }
  Eigen::Index size() const { return n_; }

  // Column of the inverse for local white index i (a vector over blacks).
  Eigen::VectorXcd inverse_column(Eigen::Index i) const {
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n_);
    e[i] = 1.0;
    return lu_.solve(e);
  }

  Eigen::MatrixXcd inverse() const { return lu_.inverse(); }

 private:
  Eigen::Index n_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 1.0;
  double log_abs_det_ = 0.0;
};

// |det ∂̄| = weighted number of perfect matchings of the region.
inline double partition_function(const DiracMatrix& D) {
  if (D.M.rows() != D.M.cols()) throw LinearAlgebraError("partition function needs a balanced region");
  DiracSolver s(D.M);
  return s.size() == 0 ? 1.0 : s.abs_det();
}

namespace detail {

inline bool shares_vertex(const std::vector<DimerEdge>& edges) {
  std::set<int> w, b;
  for (auto e : edges) {
    if (!w.insert(e.white).second || !b.insert(e.black).second) return true;
  }
  return false;
}

// ∏|M(w_i,b_i)| |det M⁻¹[b_i, w_j]| for local index pairs.
inline double minor_probability(const Eigen::MatrixXcd& M, const DiracSolver& solver,
                                const std::vector<std::pair<int, int>>& local) {
  const int t = static_cast<int>(local.size());
  Eigen::MatrixXcd minor(t, t);
  double weight = 1.0;
  for (int j = 0; j < t; ++j) {
    Eigen::VectorXcd col = solver.inverse_column(local[j].first);
    for (int i = 0; i < t; ++i) minor(i, j) = col[local[i].second];
    weight *= std::abs(M(local[j].first, local[j].second));
  }
  return weight * std::abs(minor.determinant());
}

inline std::pair<int, int> local_pair(const DiracMatrix& D, DimerEdge e) {
  const Region& r = *D.region;
  int i = e.white < static_cast<int>(r.white_index.size()) ? r.white_index[e.white] : -1;
  int j = e.black < static_cast<int>(r.black_index.size()) ? r.black_index[e.black] : -1;
  if (i < 0 || j < 0 || !r.sg->adjacent(e.white, e.black))
    throw Error("edge (" + std::to_string(e.white) + "," + std::to_string(e.black) + ") is not in the region");
  return {i, j};
}

}  // namespace detail

// Probability that all given edges belong to a uniform (weighted) perfect matching.
inline double local_stats(const DiracMatrix& D, const std::vector<DimerEdge>& edges) {
  if (edges.empty()) return 1.0;
  std::vector<std::pair<int, int>> local;
  for (auto e : edges) local.push_back(detail::local_pair(D, e));
  if (detail::shares_vertex(edges)) return 0.0;
  DiracSolver s(D.M);
  if (s.singular()) throw LinearAlgebraError("region has no perfect matching (Z = 0)");
  return detail::minor_probability(D.M, s, local);
}

struct Conditional {
  bool possible = false;  // false when the conditioning event has probability 0
  double probability = 0.0;
};

// The region with the vertices of a fixed edge set S deleted. Factorised once
// so that many events can be conditioned on the same S.
class ConditionedDirac {
 public:
  ConditionedDirac(const DiracMatrix& D, const std::vector<DimerEdge>& S) : D_(&D) {
    for (auto e : S) detail::local_pair(D, e);
    if (detail::shares_vertex(S)) return;
    for (auto e : S) {
      kw_.insert(D.region->white_index[e.white]);
      kb_.insert(D.region->black_index[e.black]);
    }
    std::vector<int> rows, cols;
    row_of_.assign(D.M.rows(), -1);
    col_of_.assign(D.M.cols(), -1);
    for (int i = 0; i < D.M.rows(); ++i)
      if (!kw_.count(i)) {
        row_of_[i] = static_cast<int>(rows.size());
        rows.push_back(i);
      }
    for (int j = 0; j < D.M.cols(); ++j)
      if (!kb_.count(j)) {
        col_of_[j] = static_cast<int>(cols.size());
        cols.push_back(j);
      }
    if (rows.size() != cols.size()) throw LinearAlgebraError("conditioned matrix is not square");
    const int n = static_cast<int>(rows.size());
    reduced_.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) reduced_(i, j) = D.M(rows[i], cols[j]);
    // the conditioning event is possible exactly when the reduced region has a matching
    if (n > 0) {
      Eigen::FullPivLU<Eigen::MatrixXcd> rank_check(reduced_);
      if (rank_check.rank() < n) return;
      solver_.emplace(reduced_);
    }
    possible_ = true;
  }

  bool possible() const { return possible_; }

  // Throws when an edge of F touches a conditioned vertex.
  void check_disjoint(const std::vector<DimerEdge>& F) const {
    for (auto e : F) {
      auto [i, j] = detail::local_pair(*D_, e);
      if (kw_.count(i) || kb_.count(j)) throw Error("conditioned edges must be vertex-disjoint from the event");
    }
  }

  double probability(const std::vector<DimerEdge>& F) const {
    check_disjoint(F);
    if (!possible_) return 0.0;
    if (F.empty()) return 1.0;
    if (detail::shares_vertex(F)) return 0.0;
    std::vector<std::pair<int, int>> local;
    for (auto e : F) {
      auto [i, j] = detail::local_pair(*D_, e);
      local.push_back({row_of_[i], col_of_[j]});
    }
    return detail::minor_probability(reduced_, *solver_, local);
  }

 private:
  const DiracMatrix* D_;
  std::set<int> kw_, kb_;
  std::vector<int> row_of_, col_of_;
  Eigen::MatrixXcd reduced_;
  std::optional<DiracSolver> solver_;
  bool possible_ = false;
};

// P(F ⊂ M | M restricted to the whites K equals S), by deleting the vertices of
// S from the matrix. `S` lists one edge per white of K.
inline Conditional conditional_local_stats(const DiracMatrix& D, const std::vector<DimerEdge>& F,
                                           const std::vector<DimerEdge>& S) {
  for (auto e : F) detail::local_pair(D, e);
  ConditionedDirac c(D, S);
  if (detail::shares_vertex(S)) return {false, 0.0};
  c.check_disjoint(F);
  if (!c.possible()) return {false, 0.0};
  return {true, c.probability(F)};
}

struct DiracInverse {
  Eigen::MatrixXcd inverse;  // blacks x whites
  double rcond = 0.0;
  double residual = 0.0;     // max |D D⁻¹ - I|
  double path_agreement = 0.0;  // max difference against an independent QR solve
};

inline DiracInverse invert_dirac(const DiracMatrix& D) {
  if (D.M.rows() != D.M.cols()) throw LinearAlgebraError("cannot invert a non-square Dirac matrix");
  DiracSolver s(D.M);
  if (s.singular()) throw LinearAlgebraError("Dirac matrix is singular");
  DiracInverse out;
  out.inverse = s.inverse();
  out.rcond = s.rcond();
  const auto n = D.M.rows();
  out.residual = (D.M * out.inverse - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  Eigen::MatrixXcd alt = D.M.colPivHouseholderQr().solve(Eigen::MatrixXcd::Identity(n, n));
  out.path_agreement = (alt - out.inverse).cwiseAbs().maxCoeff();
  return out;
}

struct BlockStructure {
  Eigen::MatrixXd laplacian_primal;  // real parts of D̄*D̄ on primal blacks
  Eigen::MatrixXd laplacian_dual;
  Eigen::MatrixXcd coupling;         // A with D̄*D̄ = [[Δ, iA], [-iAᵗ, Δ⁺]]
  std::vector<int> primal_blacks;    // superposition ids in block order
  std::vector<int> dual_blacks;
  int k_count = 0;                   // nonzero entries of A
  double imag_defect = 0.0;          // largest imaginary part inside the diagonal blocks
};

inline BlockStructure block_structure(const DiracMatrix& D, double zero_tol = 1e-12) {
  const Region& r = *D.region;
  BlockStructure bs;
  std::vector<int> pl, dl;
  for (int j = 0; j < static_cast<int>(r.blacks.size()); ++j) {
    if (r.sg->is_primal(r.blacks[j])) {
      pl.push_back(j);
      bs.primal_blacks.push_back(r.blacks[j]);
    } else {
      dl.push_back(j);
      bs.dual_blacks.push_back(r.blacks[j]);
    }
  }
  Eigen::MatrixXcd H = D.M.adjoint() * D.M;
  const int np = static_cast<int>(pl.size()), nd = static_cast<int>(dl.size());
  bs.laplacian_primal.resize(np, np);
  bs.laplacian_dual.resize(nd, nd);
  bs.coupling.resize(np, nd);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) {
      bs.laplacian_primal(i, j) = H(pl[i], pl[j]).real();
      bs.imag_defect = std::max(bs.imag_defect, std::abs(H(pl[i], pl[j]).imag()));
    }
  for (int i = 0; i < nd; ++i)
    for (int j = 0; j < nd; ++j) {
      bs.laplacian_dual(i, j) = H(dl[i], dl[j]).real();
      bs.imag_defect = std::max(bs.imag_defect, std::abs(H(dl[i], dl[j]).imag()));
    }
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < nd; ++j) {
      bs.coupling(i, j) = cd(0.0, -1.0) * H(pl[i], dl[j]);
      if (std::abs(bs.coupling(i, j)) > zero_tol) ++bs.k_count;
    }
  return bs;
}

}  // namespace hypdimer
