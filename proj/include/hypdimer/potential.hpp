#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/lattice.hpp"
#include "hypdimer/temperley.hpp"

namespace hypdimer {

// Reversible network: weighted links plus a per-node leak towards an absorbing
// exterior. `label` keeps the id of each node in whatever graph it came from.
struct Network {
  struct Link {
    int tail;
    int head;
    double conductance;
    int label = -1;  // originating edge/white id
  };
  int n = 0;
  std::vector<Link> links;
  std::vector<double> leak;
  std::vector<int> label;

  double degree(int u) const {
    double s = leak[u];
    for (const auto& l : links)
      if (l.tail == u || l.head == u) s += l.conductance;
    return s;
  }
  std::vector<double> degrees() const {
    std::vector<double> d(leak);
    for (const auto& l : links) {
      d[l.tail] += l.conductance;
      d[l.head] += l.conductance;
    }
    return d;
  }
  int node_of(int lab) const {
    auto it = std::find(label.begin(), label.end(), lab);
    return it == label.end() ? -1 : static_cast<int>(it - label.begin());
  }
  std::vector<std::vector<std::pair<int, int>>> adjacency() const {
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int i = 0; i < static_cast<int>(links.size()); ++i) {
      adj[links[i].tail].push_back({links[i].head, i});
      adj[links[i].head].push_back({links[i].tail, i});
    }
    return adj;
  }
};

inline Network make_network(int n) {
  Network net;
  net.n = n;
  net.leak.assign(n, 0.0);
  net.label.resize(n);
  std::iota(net.label.begin(), net.label.end(), 0);
  return net;
}

// Primal graph with conductances ν/ν⁺; `ambient_degree` > 0 adds leak for the
// edges a vertex is missing relative to a regular ambient graph.
inline Network primal_network(const PlanarGraph& g, int ambient_degree = 0) {
  Network net = make_network(g.num_vertices);
  for (int e = 0; e < g.num_edges(); ++e) net.links.push_back({g.tail_of_edge(e), g.head_of_edge(e), g.conductance(e), e});
  if (ambient_degree > 0)
    for (int v = 0; v < g.num_vertices; ++v) net.leak[v] = std::max(0, ambient_degree - g.degree(v));
  return net;
}

// Network on the present primal (or dual) blacks of a region. A white whose
// other endpoint is absent becomes leak at the present one.
inline Network region_network(const Region& r, bool primal) {
  const auto& sg = *r.sg;
  const auto& g = sg.base();
  Network net;
  std::vector<int> local(sg.num_black(), -1);
  for (int b : r.blacks)
    if (sg.is_primal(b) == primal) {
      local[b] = net.n++;
      net.label.push_back(b);
    }
  net.leak.assign(net.n, 0.0);
  for (int w : r.whites) {
    auto ends = primal ? sg.primal_ends(w) : sg.dual_ends(w);
    double c = primal ? g.nu[w] / g.nu_dual[w] : g.nu_dual[w] / g.nu[w];
    int a = ends[0] >= 0 && r.black_active[ends[0]] ? local[ends[0]] : -1;
    int b = ends[1] >= 0 && r.black_active[ends[1]] ? local[ends[1]] : -1;
    if (a >= 0 && b >= 0)
      net.links.push_back({a, b, c, w});
    else if (a >= 0)
      net.leak[a] += c;
    else if (b >= 0)
      net.leak[b] += c;
  }
  return net;
}

inline Eigen::SparseMatrix<double> laplacian_matrix(const Network& net) {
  std::vector<Eigen::Triplet<double>> t;
  for (int u = 0; u < net.n; ++u)
    if (net.leak[u] != 0.0) t.emplace_back(u, u, net.leak[u]);
  for (const auto& l : net.links) {
    if (l.tail == l.head) continue;
    t.emplace_back(l.tail, l.tail, l.conductance);
    t.emplace_back(l.head, l.head, l.conductance);
    t.emplace_back(l.tail, l.head, -l.conductance);
    t.emplace_back(l.head, l.tail, -l.conductance);
  }
  Eigen::SparseMatrix<double> L(net.n, net.n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

enum class Flavor { dirichlet, neumann, free };

inline const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::dirichlet: return "dirichlet";
    case Flavor::neumann: return "neumann";
    default: return "free";
  }
}

struct LaplacianOperator {
  Flavor flavor = Flavor::dirichlet;
  Network network;
  Eigen::SparseMatrix<double> matrix;
  int root = -1;  // neumann: the deleted vertex label
};

// Dirichlet: absorb through the network's leak. Neumann: ground the vertex
// labelled `root` (its row and column are removed). Free: plain Laplacian.
inline LaplacianOperator laplacian(Network net, Flavor flavor, int root = -1) {
  LaplacianOperator L;
  L.flavor = flavor;
  if (flavor == Flavor::neumann) {
    int r = net.node_of(root);
    if (r < 0) throw GraphError("neumann root " + std::to_string(root) + " is not a node");
    Network reduced;
    std::vector<int> local(net.n, -1);
    for (int u = 0; u < net.n; ++u)
      if (u != r) {
        local[u] = reduced.n++;
        reduced.label.push_back(net.label[u]);
        reduced.leak.push_back(net.leak[u]);
      }
    for (const auto& l : net.links) {
      int a = local[l.tail], b = local[l.head];
      if (a >= 0 && b >= 0)
        reduced.links.push_back({a, b, l.conductance, l.label});
      else if (a >= 0)
        reduced.leak[a] += l.conductance;
      else if (b >= 0)
        reduced.leak[b] += l.conductance;
    }
    net = std::move(reduced);
    L.root = root;
  }
  L.matrix = laplacian_matrix(net);
  L.network = std::move(net);
  return L;
}

// Block of a region: for a Temperley region the primal side is the Neumann
// Laplacian rooted at b0 (already absent from the region).
inline LaplacianOperator laplacian(const Region& r, bool primal) {
  LaplacianOperator L;
  L.flavor = primal && r.profile.b0 >= 0 ? Flavor::neumann : Flavor::dirichlet;
  L.root = primal ? r.profile.b0 : -1;
  L.network = region_network(r, primal);
  L.matrix = laplacian_matrix(L.network);
  return L;
}

// Δ⁻¹ of a Dirichlet or root-grounded Laplacian. Columns are solved on demand
// from one sparse factorisation. G(u,v) = Δ⁻¹(u,v) Δ(v,v) counts expected
// visits to v from u; F^v(u) = Δ⁻¹(u,v).
class GreenTable {
 public:
  explicit GreenTable(const LaplacianOperator& L) : L_(L) {
    if (L.flavor == Flavor::free) throw LinearAlgebraError("free Laplacian has no Green's function");
    solver_.compute(L_.matrix);
    if (solver_.info() != Eigen::Success) throw LinearAlgebraError("Laplacian factorisation failed");
    const auto& D = solver_.vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i)
      if (!(D[i] > 1e-14 * std::max(1.0, std::abs(L_.matrix.coeff(i, i)))))
        throw LinearAlgebraError("singular Laplacian: no absorbing boundary");
    cache_.resize(L_.network.n);
    int top = 0;
    for (int lab : L_.network.label) top = std::max(top, lab + 1);
    node_of_.assign(top, -1);
    for (int u = 0; u < L_.network.n; ++u)
      if (L_.network.label[u] >= 0) node_of_[L_.network.label[u]] = u;
  }

  Flavor flavor() const { return L_.flavor; }
  const LaplacianOperator& op() const { return L_; }
  int node(int label) const { return label >= 0 && label < static_cast<int>(node_of_.size()) ? node_of_[label] : -1; }

  const Eigen::VectorXd& column(int v) const {
    if (!cache_[v]) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(L_.network.n);
      e[v] = 1.0;
      cache_[v] = solver_.solve(e);
    }
    return *cache_[v];
  }

  // F^v(u) for node labels; labels outside the table (absorbed or the root) give 0.
  double F(int u_label, int v_label) const {
    int u = node(u_label), v = node(v_label);
    if (u < 0 || v < 0) return 0.0;
    return column(v)[u];
  }
  double G(int u_label, int v_label) const {
    int v = node(v_label);
    if (v < 0) return 0.0;
    return F(u_label, v_label) * L_.matrix.coeff(v, v);
  }

  // max |Δ F^v − δ_v| over the given columns (all when empty)
  double delta_residual(std::vector<int> nodes = {}) const {
    if (nodes.empty()) {
      nodes.resize(L_.network.n);
      std::iota(nodes.begin(), nodes.end(), 0);
    }
    double worst = 0.0;
    for (int v : nodes) {
      Eigen::VectorXd r = L_.matrix * column(v);
      r[v] -= 1.0;
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
  }

  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd M(L_.network.n, L_.network.n);
    for (int v = 0; v < L_.network.n; ++v) M.col(v) = column(v);
    return M;
  }

 private:
  LaplacianOperator L_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  std::vector<int> node_of_;
  mutable std::vector<std::optional<Eigen::VectorXd>> cache_;
};

inline double dirichlet_green(const GreenTable& t, int u, int v) {
  if (t.flavor() != Flavor::dirichlet) throw Error("table is not of Dirichlet flavor");
  return t.G(u, v);
}

inline double neumann_green(const GreenTable& t, int u, int v) {
  if (t.flavor() != Flavor::neumann) throw Error("table is not of Neumann flavor");
  return t.G(u, v);
}

// D̄⁻¹ of a region assembled from the primal and dual Green tables:
//   dual b:   (1/ξ)(F^{b1}(b) − F^{b2}(b)) √(ν⁺/ν), ξ the unit vector from b2 to b1
//   primal b: (1/ζ)(F^{b3}(b) − F^{b4}(b)) √(ν/ν⁺), ζ the unit vector from b4 to b3
// where b1,b2 (b3,b4) are the dual (primal) ends of w. Exact whenever D̄*D̄ has
// no mixed block, i.e. the region has no concave white corner.
class GreenDirac {
 public:
  explicit GreenDirac(const Region& r)
      : r_(&r), primal_(laplacian(r, true)), dual_(laplacian(r, false)) {}

  const GreenTable& primal() const { return primal_; }
  const GreenTable& dual() const { return dual_; }

  cd operator()(int b, int w) const {
    const auto& sg = *r_->sg;
    const auto& g = sg.base();
    if (b < 0 || b >= sg.num_black() || !r_->black_active[b])
      throw RegionError("black " + std::to_string(b) + " is not in the region");
    if (w < 0 || w >= sg.num_white() || !r_->white_active[w]) throw RegionError("white is not in the region", w);
    if (sg.is_primal(b)) {
      auto [b3, b4] = sg.primal_ends(w);
      Point zeta = unit(sg.black_pos[b3] - sg.black_pos[b4]);
      double f = primal_.F(b, b3) - primal_.F(b, b4);
      return std::sqrt(g.nu[w] / g.nu_dual[w]) * f / zeta;
    }
    auto [b1, b2] = sg.dual_ends(w);
    Point xi;
    if (b1 >= 0 && b2 >= 0)
      xi = unit(sg.black_pos[b1] - sg.black_pos[b2]);
    else if (b1 >= 0)
      xi = unit(sg.black_pos[b1] - sg.white_pos[w]);
    else
      xi = unit(sg.white_pos[w] - sg.black_pos[b2]);
    double f = (b1 >= 0 ? dual_.F(b, b1) : 0.0) - (b2 >= 0 ? dual_.F(b, b2) : 0.0);
    return std::sqrt(g.nu_dual[w] / g.nu[w]) * f / xi;
  }

  // blacks x whites in the region's local order
  Eigen::MatrixXcd matrix() const {
    Eigen::MatrixXcd M(r_->blacks.size(), r_->whites.size());
    for (std::size_t i = 0; i < r_->blacks.size(); ++i)
      for (std::size_t j = 0; j < r_->whites.size(); ++j) M(i, j) = (*this)(r_->blacks[i], r_->whites[j]);
    return M;
  }

 private:
  static Point unit(Point z) { return z / std::abs(z); }
  const Region* r_;
  GreenTable primal_;
  GreenTable dual_;
};

inline cd inverse_dirac_via_green(const GreenDirac& gd, int b, int w) { return gd(b, w); }

// Antisymmetric edge functions over a connected network without leak, stored
// as one value per link in the tail→head direction.
using EdgeFunction = Eigen::VectorXd;

class FlowSpace {
 public:
  explicit FlowSpace(Network net) : net_(std::move(net)) {
    for (double l : net_.leak)
      if (l != 0.0) throw GraphError("flow space needs a network without leak; wire the exterior first");
    const int m = static_cast<int>(net_.links.size());
    resistance_.resize(m);
    for (int i = 0; i < m; ++i) resistance_[i] = 1.0 / net_.links[i].conductance;
    if (net_.n > 1) {
      auto L = laplacian_matrix(net_);
      grounded_ = Eigen::MatrixXd(L).bottomRightCorner(net_.n - 1, net_.n - 1);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(grounded_);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14)
        throw GraphError("flow space needs a connected network");
      potential_of_unit_ = ldlt.solve(Eigen::MatrixXd::Identity(net_.n - 1, net_.n - 1));
    }
    build_cycle_basis();
  }

  const Network& network() const { return net_; }
  int num_links() const { return static_cast<int>(net_.links.size()); }
  const Eigen::VectorXd& resistance() const { return resistance_; }
  const Eigen::MatrixXd& cycle_basis() const { return cycles_; }

  double inner(const EdgeFunction& a, const EdgeFunction& b) const {
    return (a.array() * b.array() * resistance_.array()).sum();
  }
  double energy(const EdgeFunction& a) const { return inner(a, a); }

  EdgeFunction unit(int link) const {
    EdgeFunction x = EdgeFunction::Zero(num_links());
    x[link] = 1.0;
    return x;
  }

  EdgeFunction gradient(const Eigen::VectorXd& f) const {
    EdgeFunction x(num_links());
    for (int i = 0; i < num_links(); ++i) x[i] = f[net_.links[i].head] - f[net_.links[i].tail];
    return x;
  }

  // net outflow at each vertex
  Eigen::VectorXd divergence(const EdgeFunction& x) const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(net_.n);
    for (int i = 0; i < num_links(); ++i) {
      d[net_.links[i].tail] += x[i];
      d[net_.links[i].head] -= x[i];
    }
    return d;
  }

  // Potential with Δφ = div x, grounded at vertex 0.
  Eigen::VectorXd potential(const Eigen::VectorXd& div) const {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(net_.n);
    if (net_.n > 1) phi.tail(net_.n - 1) = potential_of_unit_ * div.tail(net_.n - 1);
    return phi;
  }

  // P_★: the current with the same divergence, C·(φ(tail) − φ(head)).
  EdgeFunction star_project(const EdgeFunction& x) const {
    Eigen::VectorXd phi = potential(divergence(x));
    EdgeFunction out(num_links());
    for (int i = 0; i < num_links(); ++i)
      out[i] = net_.links[i].conductance * (phi[net_.links[i].tail] - phi[net_.links[i].head]);
    return out;
  }

  // P_◇ by normal equations on the fundamental cycles of the breadth tree.
  EdgeFunction cycle_project(const EdgeFunction& x) const {
    if (cycles_.cols() == 0) return EdgeFunction::Zero(num_links());
    Eigen::MatrixXd RZ = resistance_.asDiagonal() * cycles_;
    Eigen::MatrixXd normal = cycles_.transpose() * RZ;
    Eigen::VectorXd coeff = normal.ldlt().solve(RZ.transpose() * x);
    return cycles_ * coeff;
  }

  // I_e: unit current from tail to head of link e.
  EdgeFunction transfer_current(int e) const { return star_project(unit(e)); }

  // Y(e,f) = I_e(f)
  double transfer_current(int e, int f) const {
    const auto& le = net_.links[e];
    const auto& lf = net_.links[f];
    auto pot = [&](int v) {
      if (v == 0 || net_.n <= 1) return 0.0;
      double a = le.tail == 0 ? 0.0 : potential_of_unit_(v - 1, le.tail - 1);
      double b = le.head == 0 ? 0.0 : potential_of_unit_(v - 1, le.head - 1);
      return a - b;
    };
    return lf.conductance * (pot(lf.tail) - pot(lf.head));
  }

  // P(e_1, ..., e_k all in the weighted spanning tree) = det Y.
  double tree_cylinder_prob(const std::vector<int>& edges) const {
    std::vector<int> parent(net_.n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (int e : edges) {
      int a = find(net_.links[e].tail), b = find(net_.links[e].head);
      if (a == b) return 0.0;  // the edges contain a cycle
      parent[a] = b;
    }
    const int k = static_cast<int>(edges.size());
    Eigen::MatrixXd Y(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) Y(i, j) = transfer_current(edges[i], edges[j]);
    return k == 0 ? 1.0 : Y.determinant();
  }

  std::vector<double> edge_marginals() const {
    std::vector<double> p(num_links());
    for (int e = 0; e < num_links(); ++e) p[e] = transfer_current(e, e);
    return p;
  }

 private:
  void build_cycle_basis() {
    const int m = num_links();
    auto adj = net_.adjacency();
    std::vector<int> parent_link(net_.n, -1), depth(net_.n, -1);
    std::vector<char> tree(m, 0);
    std::queue<int> q;
    if (net_.n > 0) {
      depth[0] = 0;
      q.push(0);
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (auto [v, id] : adj[u])
        if (depth[v] < 0) {
          depth[v] = depth[u] + 1;
          parent_link[v] = id;
          tree[id] = 1;
          q.push(v);
        }
    }
    std::vector<Eigen::VectorXd> cols;
    for (int id = 0; id < m; ++id) {
      if (tree[id]) continue;
      // the link tail→head closed by tree paths head→lca←tail
      Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
      z[id] = 1.0;
      int a = net_.links[id].head, b = net_.links[id].tail;
      auto step_up = [&](int& x, double sign) {
        int l = parent_link[x];
        const auto& L = net_.links[l];
        int up = L.tail == x ? L.head : L.tail;
        // traversing x→up adds +1 if that matches the link orientation
        z[l] += sign * (L.tail == x ? 1.0 : -1.0);
        x = up;
      };
      while (depth[a] > depth[b]) step_up(a, 1.0);
      while (depth[b] > depth[a]) step_up(b, -1.0);
      while (a != b) {
        step_up(a, 1.0);
        step_up(b, -1.0);
      }
      cols.push_back(z);
    }
    cycles_.resize(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) cycles_.col(static_cast<Eigen::Index>(i)) = cols[i];
  }

  Network net_;
  Eigen::VectorXd resistance_;
  Eigen::MatrixXd grounded_;
  Eigen::MatrixXd potential_of_unit_;
  Eigen::MatrixXd cycles_;
};

// Turns leak into links to one extra exterior vertex (label -1).
inline Network wire_exterior(const Network& net, const std::vector<char>* wired = nullptr) {
  Network out = make_network(net.n + 1);
  for (int u = 0; u < net.n; ++u) out.label[u] = net.label[u];
  out.label[net.n] = -1;
  out.links = net.links;
  for (int u = 0; u < net.n; ++u)
    if (net.leak[u] > 0.0 && (!wired || (*wired)[u])) out.links.push_back({u, net.n, net.leak[u], -1});
  return out;
}

// Drops the leak of every node (free boundary).
inline Network free_boundary(const Network& net) {
  Network out = net;
  std::fill(out.leak.begin(), out.leak.end(), 0.0);
  return out;
}

struct ForestMarginals {
  std::vector<double> probability;  // per link of the input network
  int wired_count = 0;
};

// Edge marginals of the weighted spanning tree in which the exterior edges of
// the nodes in U are wired to one vertex and those of the other nodes dropped.
// U = all leaking nodes gives the wired measure, U = ∅ the free one.
inline ForestMarginals mixed_boundary_forest(const Network& patch, const std::vector<int>& U) {
  std::vector<char> wired(patch.n, 0);
  for (int u : U) wired.at(u) = 1;
  ForestMarginals out;
  out.wired_count = static_cast<int>(U.size());
  bool any = false;
  for (int u = 0; u < patch.n; ++u) any = any || (wired[u] && patch.leak[u] > 0.0);
  FlowSpace fs(any ? wire_exterior(patch, &wired) : free_boundary(patch));
  out.probability.resize(patch.links.size());
  for (std::size_t i = 0; i < patch.links.size(); ++i)
    out.probability[i] = fs.transfer_current(static_cast<int>(i), static_cast<int>(i));
  return out;
}

struct AddedEdgeFlow {
  EdgeFunction theta;   // over the links of the augmented network; the added link is last
  double diagonal = 0.0;  // ⟨θ, χ_(b,b0)⟩ = θ on the added link
  Network network;
};

// Star projection of the unit flow along an extra unit-conductance link b→b0.
inline AddedEdgeFlow added_edge_current(const Network& net, int b, int b0, double conductance = 1.0) {
  if (b == b0) throw GraphError("added edge needs distinct endpoints");
  Network aug = net;
  aug.links.push_back({b, b0, conductance, -1});
  FlowSpace fs(aug);
  AddedEdgeFlow out;
  out.theta = fs.transfer_current(fs.num_links() - 1);
  out.diagonal = out.theta[fs.num_links() - 1];
  out.network = std::move(aug);
  return out;
}

// BLPS-type bound on |μ(A1∩A2) − μ(A1)μ(A2)| for events on edge sets K and F.
inline double correlation_bound(const FlowSpace& fs, const std::vector<int>& K, const std::vector<int>& F) {
  double sum = 0.0;
  for (int e : K) {
    EdgeFunction I = fs.transfer_current(e);
    double proj = 0.0;
    for (int f : F) proj += fs.resistance()[f] * I[f] * I[f];
    sum += fs.network().links[e].conductance * proj;
  }
  return std::sqrt(std::pow(2.0, 2.0 * K.size()) * K.size() * sum);
}

struct HarmonicSplit {
  Eigen::VectorXd g;  // vanishes on the boundary
  Eigen::VectorXd h;  // harmonic off the boundary, equal to f on it
};

// f = g + h with h the harmonic extension of f's boundary values.
inline HarmonicSplit harmonic_decompose(const Network& net, const Eigen::VectorXd& f, const std::vector<char>& boundary) {
  std::vector<int> interior, local(net.n, -1);
  for (int u = 0; u < net.n; ++u)
    if (!boundary[u]) {
      local[u] = static_cast<int>(interior.size());
      interior.push_back(u);
    }
  Eigen::SparseMatrix<double> L = laplacian_matrix(free_boundary(net));
  HarmonicSplit out;
  out.h = f;
  if (!interior.empty()) {
    const int k = static_cast<int>(interior.size());
    std::vector<Eigen::Triplet<double>> t;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (int col = 0; col < L.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, col); it; ++it) {
        int i = local[it.row()];
        if (i < 0) continue;
        int j = local[it.col()];
        if (j >= 0)
          t.emplace_back(i, j, it.value());
        else
          rhs[i] -= it.value() * f[it.col()];
      }
    Eigen::SparseMatrix<double> A(k, k);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success) throw LinearAlgebraError("interior has no boundary to pin it");
    Eigen::VectorXd x = lu.solve(rhs);
    for (int i = 0; i < k; ++i) out.h[interior[i]] = x[i];
  }
  out.g = f - out.h;
  return out;
}

struct SpectralEstimate {
  double rho_hat = 0.0;       // √(p_{2n}/p_{2n−2})
  double rho_root = 0.0;      // p_{2n}^{1/2n}
  double rho_prime = 0.0;     // rho_hat plus the safety margin, capped
  std::vector<double> returns;  // p_{2k}(x,x), k = 1..n_max
};

// Return probabilities of the walk killed through the leak, started at x.
inline SpectralEstimate spectral_radius_estimate(const Network& net, int x, int n_max, double margin = 0.02) {
  auto deg = net.degrees();
  auto adj = net.adjacency();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(net.n);
  p[x] = 1.0;
  SpectralEstimate est;
  auto step = [&](const Eigen::VectorXd& in) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(net.n);
    for (int u = 0; u < net.n; ++u) {
      if (in[u] == 0.0) continue;
      for (auto [v, id] : adj[u]) out[v] += in[u] * net.links[id].conductance / deg[u];
    }
    return out;
  };
  for (int k = 1; k <= n_max; ++k) {
    p = step(step(p));
    est.returns.push_back(p[x]);
  }
  const int n = static_cast<int>(est.returns.size());
  if (n >= 1) est.rho_root = std::pow(est.returns.back(), 0.5 / n);
  est.rho_hat = n >= 2 ? std::sqrt(est.returns[n - 1] / est.returns[n - 2]) : est.rho_root;
  est.rho_prime = std::min(est.rho_hat + margin, 0.999);
  return est;
}

struct IsoperimetricScan {
  double constant = std::numeric_limits<double>::infinity();  // min |∂K|/|K| found
  std::vector<double> best_by_size;                            // index s−1
  std::vector<int> best_set;
};

// Beam search over connected sets of interior vertices (vertices whose full
// ambient degree is present, so |∂_E K| matches the ambient graph).
inline IsoperimetricScan isoperimetric_scan(const PlanarGraph& g, int size_cap, int beam = 48) {
  auto boundary = g.boundary_flags();
  std::vector<std::vector<int>> nb(g.num_vertices);
  for (int v = 0; v < g.num_vertices; ++v)
    for (int h : g.rotation[v]) nb[v].push_back(g.head(h));
  struct Cand {
    std::vector<int> set;
    int cut;
  };
  IsoperimetricScan out;
  std::vector<Cand> layer;
  for (int v = 0; v < g.num_vertices; ++v)
    if (!boundary[v]) layer.push_back({{v}, g.degree(v)});
  for (int s = 1; s <= size_cap && !layer.empty(); ++s) {
    std::sort(layer.begin(), layer.end(), [](const Cand& a, const Cand& b) {
      return a.cut != b.cut ? a.cut < b.cut : a.set < b.set;
    });
    if (static_cast<int>(layer.size()) > beam) layer.resize(beam);
    double ratio = static_cast<double>(layer.front().cut) / s;
    out.best_by_size.push_back(ratio);
    if (ratio < out.constant) {
      out.constant = ratio;
      out.best_set = layer.front().set;
    }
    if (s == size_cap) break;
    std::set<std::vector<int>> seen;
    std::vector<Cand> next;
    for (const auto& c : layer) {
      std::set<int> members(c.set.begin(), c.set.end());
      for (int u : c.set)
        for (int v : nb[u]) {
          if (boundary[v] || members.count(v)) continue;
          int inside = 0;
          for (int y : nb[v]) inside += members.count(y) ? 1 : 0;
          std::vector<int> grown = c.set;
          grown.insert(std::upper_bound(grown.begin(), grown.end(), v), v);
          if (!seen.insert(grown).second) continue;
          next.push_back({std::move(grown), c.cut + g.degree(v) - 2 * inside});
        }
    }
    layer = std::move(next);
  }
  return out;
}

struct DecayReport {
  int center = -1;
  std::vector<int> distance;         // per vertex
  std::vector<double> green;         // G(center, ·)
  std::vector<double> shell_mean_log;  // mean log G per distance
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  SpectralEstimate spectral;
  double bound_violation = 0.0;  // max over y of G − √(D/3) ρ′^d/(1−ρ′), ≤ 0 when the bound holds
};

// Dirichlet Green's function of the walk killed on leaving the patch (ambient
// degree q), fitted log-linearly against graph distance from `center`.
inline DecayReport green_decay_check(const PlanarGraph& g, int ambient_degree, int center, int spectral_steps = 40) {
  Network net = primal_network(g, ambient_degree);
  GreenTable table(laplacian(net, Flavor::dirichlet));
  DecayReport rep;
  rep.center = center;
  rep.distance.assign(g.num_vertices, -1);
  std::queue<int> q;
  rep.distance[center] = 0;
  q.push(center);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int h : g.rotation[u]) {
      int v = g.head(h);
      if (rep.distance[v] < 0) {
        rep.distance[v] = rep.distance[u] + 1;
        q.push(v);
      }
    }
  }
  rep.green.resize(g.num_vertices);
  for (int v = 0; v < g.num_vertices; ++v) rep.green[v] = table.G(center, v);
  int dmax = *std::max_element(rep.distance.begin(), rep.distance.end());
  std::vector<double> sum(dmax + 1, 0.0);
  std::vector<int> cnt(dmax + 1, 0);
  for (int v = 0; v < g.num_vertices; ++v) {
    sum[rep.distance[v]] += std::log(rep.green[v]);
    ++cnt[rep.distance[v]];
  }
  rep.shell_mean_log.resize(dmax + 1);
  for (int d = 0; d <= dmax; ++d) rep.shell_mean_log[d] = sum[d] / cnt[d];
  // least squares over shells
  double n = dmax + 1, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int d = 0; d <= dmax; ++d) {
    sx += d;
    sy += rep.shell_mean_log[d];
    sxx += double(d) * d;
    sxy += d * rep.shell_mean_log[d];
  }
  double den = n * sxx - sx * sx;
  rep.slope = den > 0 ? (n * sxy - sx * sy) / den : 0.0;
  rep.intercept = (sy - rep.slope * sx) / n;
  double mean = sy / n, ss_tot = 0, ss_res = 0;
  for (int d = 0; d <= dmax; ++d) {
    double fit = rep.intercept + rep.slope * d;
    ss_tot += std::pow(rep.shell_mean_log[d] - mean, 2);
    ss_res += std::pow(rep.shell_mean_log[d] - fit, 2);
  }
  rep.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  rep.spectral = spectral_radius_estimate(net, center, spectral_steps);
  double D = ambient_degree;
  double rp = rep.spectral.rho_prime;
  rep.bound_violation = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < g.num_vertices; ++v) {
    double bound = std::sqrt(D / 3.0) * std::pow(rp, rep.distance[v]) / (1.0 - rp);
    rep.bound_violation = std::max(rep.bound_violation, rep.green[v] - bound);
  }
  return rep;
}

}  // namespace hypdimer
