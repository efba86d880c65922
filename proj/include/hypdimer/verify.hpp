#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hypdimer/config.hpp"
#include "hypdimer/heights.hpp"
#include "hypdimer/io.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/potential.hpp"
#include "hypdimer/sampler.hpp"

namespace hypdimer {

struct SuiteResult {
  std::string name;
  bool passed = true;
  double residual = 0.0;
  double tolerance = 0.0;
  int cases = 0;
  std::string detail;

  nlohmann::json to_json() const {
    return {{"name", name},         {"passed", passed}, {"residual", residual},
            {"tolerance", tolerance}, {"cases", cases},   {"detail", detail}};
  }
};

struct VerifyReport {
  Provenance provenance;
  std::vector<SuiteResult> suites;

  bool passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
  }
  const SuiteResult* first_failure() const {
    for (const auto& s : suites)
      if (!s.passed) return &s;
    return nullptr;
  }
  nlohmann::json to_json() const {
    nlohmann::json j = provenance.to_json();
    j["suites"] = nlohmann::json::array();
    for (const auto& s : suites) j["suites"].push_back(s.to_json());
    j["passed"] = passed();
    return j;
  }
};

// Weighted sum over perfect matchings by depth-first search, always branching
// on the unmatched white with the fewest free neighbours.
inline double enumerate_matching_sum(const Region& r, long long limit = 20'000'000) {
  const auto& sg = *r.sg;
  std::vector<char> used(sg.num_black(), 0), done(r.size(), 0);
  long long visited = 0;
  std::function<double(int)> rec = [&](int left) -> double {
    if (++visited > limit) throw Error("matching enumeration exceeded its node budget");
    if (left == 0) return 1.0;
    int best = -1, best_free = 1 << 30;
    for (int i = 0; i < r.size(); ++i) {
      if (done[i]) continue;
      int free = 0;
      for (int b : r.neighbors(r.whites[i])) free += !used[b];
      if (free < best_free) {
        best = i;
        best_free = free;
      }
      if (free == 0) return 0.0;
    }
    const int w = r.whites[best];
    done[best] = 1;
    double z = 0.0;
    for (int b : r.neighbors(w)) {
      if (used[b]) continue;
      used[b] = 1;
      z += sg.weight(w, b) * rec(left - 1);
      used[b] = 0;
    }
    done[best] = 0;
    return z;
  };
  return rec(r.size());
}

struct VerifyCase {
  std::string name;
  PlanarGraph graph;
  DoubleCirclePacking packing;
  std::shared_ptr<const SuperpositionGraph> sg;
  Region region;
};

namespace detail {

inline VerifyCase make_case(std::string name, PlanarGraph g, Geometry geo) {
  VerifyCase c;
  c.name = std::move(name);
  c.graph = std::move(g);
  c.packing = solve_double_packing(c.graph, geo);
  c.sg = std::make_shared<const SuperpositionGraph>(superpose(c.graph, c.packing));
  c.region = temperley_trim(c.sg);
  return c;
}

inline bool small_enough(const Region& r, int max_white) { return r.size() <= max_white; }

}  // namespace detail

// Fixed fixtures with seeded random weights, then each configured family at its
// smallest radius with the configured weights and boundary.
inline std::vector<VerifyCase> verify_cases(const RunConfig& cfg) {
  std::vector<VerifyCase> out;
  WeightSpec random_weights;
  random_weights.mode = WeightSpec::Mode::random;
  auto fixture = [&](std::string name, PlanarGraph g, Geometry geo) {
    apply_weights(g, random_weights, cfg.seed);
    out.push_back(detail::make_case(std::move(name), std::move(g), geo));
  };
  fixture("grid(2)", square_grid(2), Geometry::euclidean);
  fixture("{3,7} depth 1", build_pq_tiling(3, 7, 1), Geometry::hyperbolic);
  fixture("{3,7} depth 0", build_pq_tiling(3, 7, 0), Geometry::hyperbolic);
  fixture("{5,4} depth 0", build_pq_tiling(5, 4, 0), Geometry::hyperbolic);
  fixture("{7,3} depth 0", build_pq_tiling(7, 3, 0), Geometry::hyperbolic);
  for (const auto& f : cfg.families) {
    int radius = f.radii.front();
    auto weigh = [&](PlanarGraph& g) { apply_weights(g, cfg.weights, cfg.seed); };
    auto ex = experiment_region(f.family, f.p, f.q, radius, cfg.boundary, weigh);
    VerifyCase c;
    c.name = f.name() + " radius " + std::to_string(radius);
    c.graph = ex.sg->base();
    c.packing = ex.packing;
    c.sg = ex.sg;
    c.region = ex.region;
    out.push_back(std::move(c));
  }
  return out;
}

namespace detail {

// Runs `body` per case, tracking the worst residual; library errors fail the suite.
template <class Body>
SuiteResult run_suite(const std::string& name, double tol, const std::vector<VerifyCase>& cases, Body&& body) {
  SuiteResult s;
  s.name = name;
  s.tolerance = tol;
  std::ostringstream detail;
  for (const auto& c : cases) {
    try {
      auto res = body(c);  // optional<double>: nullopt skips the case
      if (!res) continue;
      ++s.cases;
      if (*res > s.residual) s.residual = *res;
      if (!(*res <= tol)) {
        s.passed = false;
        detail << c.name << ": " << *res << "; ";
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      ++s.cases;
      s.passed = false;
      detail << c.name << ": " << e.what() << "; ";
    }
  }
  s.detail = detail.str();
  if (s.detail.empty()) s.detail = "ok";
  return s;
}

}  // namespace detail

inline VerifyReport run_verify(const RunConfig& cfg, int enumeration_max_white = 26) {
  VerifyReport rep;
  rep.provenance = make_provenance(cfg.identity_json());
  auto cases = verify_cases(cfg);
  using R = std::optional<double>;

  rep.suites.push_back(detail::run_suite("packing_certification", 1.0, cases, [&](const VerifyCase& c) -> R {
    double tol = c.packing.geometry == Geometry::euclidean ? cfg.tol.packing_euclidean : cfg.tol.packing_hyperbolic;
    auto r = certify(c.graph, c.packing, tol);
    double worst = std::max({r.tangency, r.orthogonality, r.dual_tangency, r.perpendicularity, r.overlap});
    return worst / tol;  // reported relative to the geometry's tolerance
  }));
  rep.suites.back().detail += " (residual relative to the per-geometry tolerance)";

  rep.suites.push_back(detail::run_suite("face_signs", cfg.tol.face_sign, cases,
                                         [&](const VerifyCase& c) -> R { return face_sign_defect(*c.sg); }));

  rep.suites.push_back(detail::run_suite("kasteleyn_determinant", cfg.tol.kasteleyn, cases, [&](const VerifyCase& c) -> R {
    if (!detail::small_enough(c.region, enumeration_max_white)) return std::nullopt;
    double z = enumerate_matching_sum(c.region);
    double det = partition_function(build_dirac(c.region));
    return std::abs(det - z) / std::max(z, 1e-300);
  }));

  rep.suites.push_back(detail::run_suite("green_inverse_dirac", cfg.tol.green, cases, [&](const VerifyCase& c) -> R {
    auto inv = invert_dirac(build_dirac(c.region, DiracVariant::normalized));
    GreenDirac gd(c.region);
    return (gd.matrix() - inv.inverse).cwiseAbs().maxCoeff();
  }));

  rep.suites.push_back(detail::run_suite("entry_table", cfg.tol.entry_table, cases, [&](const VerifyCase& c) -> R {
    auto bs = block_structure(build_dirac(c.region, DiracVariant::normalized));
    Eigen::MatrixXd Lp(laplacian(c.region, true).matrix), Ld(laplacian(c.region, false).matrix);
    return std::max((Lp - bs.laplacian_primal).cwiseAbs().maxCoeff(), (Ld - bs.laplacian_dual).cwiseAbs().maxCoeff());
  }));

  // residual counts failed round trips over seeded samples
  rep.suites.push_back(detail::run_suite("temperley_bijection", 0.0, cases, [&](const VerifyCase& c) -> R {
    MatchingSampler s(c.region);
    Rng rng = make_rng(cfg.seed, "verify/" + c.name);
    int failures = 0;
    for (int k = 0; k < 50; ++k) {
      auto m = s.sample(rng);
      if (!m.valid() || s.map().forward(s.map().inverse(m).primal) != m) ++failures;
    }
    return static_cast<double>(failures);
  }));
  return rep;
}

}  // namespace hypdimer
