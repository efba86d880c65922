#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/sampler.hpp"
#include "hypdimer/temperley.hpp"

namespace hypdimer {

// θ_e/2π per superposition edge: the angle at the black end between the
// diagonals of the (up to two) quads sharing the edge.
struct AngleFlow {
  std::vector<double> theta;
  std::vector<char> complete;  // both quads present
};

inline AngleFlow angle_flow(const SuperpositionGraph& sg) {
  AngleFlow a;
  a.theta.assign(sg.edges.size(), 0.0);
  a.complete.assign(sg.edges.size(), 0);
  std::vector<int> seen(sg.edges.size(), 0);
  auto edge_id = [&](int w, int b) {
    for (int id : sg.white_edges[w])
      if (sg.edges[id].black == b) return id;
    throw InvariantError("quad edge missing from the superposition");
  };
  for (const auto& Q : sg.quads)
    for (auto [b, other] : {std::pair{Q.v, Q.f}, {Q.f, Q.v}})
      for (int w : {Q.w1, Q.w2}) {
        int id = edge_id(w, b);
        Point base = sg.black_pos[b];
        double ang = std::abs(std::arg((sg.white_pos[w] - base) / (sg.black_pos[other] - base)));
        a.theta[id] += ang / (2.0 * std::numbers::pi);
        ++seen[id];
      }
  for (std::size_t i = 0; i < seen.size(); ++i) a.complete[i] = seen[i] == 2;
  return a;
}

struct FlowSumReport {
  double max_defect = 0.0;
  int checked = 0;
  int flagged = 0;  // boundary vertices skipped
};

// Sum of θ/2π over the edges at every vertex whose surrounding quads all exist.
inline FlowSumReport flow_sum_defect(const SuperpositionGraph& sg, const AngleFlow& a) {
  FlowSumReport r;
  auto visit = [&](const std::vector<int>& ids) {
    double s = 0.0;
    for (int id : ids) {
      if (!a.complete[id]) {
        ++r.flagged;
        return;
      }
      s += a.theta[id];
    }
    ++r.checked;
    r.max_defect = std::max(r.max_defect, std::abs(s - 1.0));
  };
  for (int w = 0; w < sg.num_white(); ++w) visit(sg.white_edges[w]);
  for (int b = 0; b < sg.num_black(); ++b) visit(sg.black_edges[b]);
  return r;
}

// Faces of a region: its inside quads plus one exterior node, and the
// superposition edges separating them.
class FaceGraph {
 public:
  struct Crossing {
    int from;
    int to;
    int white;
    int black;
    int edge;
    int sign;  // +1 when the white is on the left moving from -> to
  };

  explicit FaceGraph(const Region& r) : region_(&r) {
    const auto& sg = *r.sg;
    node_of_quad_.assign(sg.quads.size(), -1);
    for (int q = 0; q < static_cast<int>(sg.quads.size()); ++q)
      if (r.quad_inside(q)) {
        node_of_quad_[q] = static_cast<int>(quad_of_node_.size());
        quad_of_node_.push_back(q);
      }
    exterior_ = static_cast<int>(quad_of_node_.size());
    for (int id = 0; id < static_cast<int>(sg.edges.size()); ++id) {
      int w = sg.edges[id].white, b = sg.edges[id].black;
      if (!r.white_active[w] || !r.black_active[b]) continue;
      int sides[2] = {exterior_, exterior_}, signs[2] = {0, 0}, k = 0;
      for (int q : sg.quads_of_white[w]) {
        const auto& Q = sg.quads[q];
        if (Q.v != b && Q.f != b) continue;
        bool white_left = (Q.v == b && Q.w1 == w) || (Q.f == b && Q.w2 == w);
        if (k < 2) {
          sides[k] = node(q);
          signs[k] = white_left ? 1 : -1;
        }
        ++k;
      }
      if (k == 0) continue;
      if (sides[0] == exterior_ && sides[1] != exterior_) {
        std::swap(sides[0], sides[1]);
        std::swap(signs[0], signs[1]);
      }
      if (signs[0] == 0) signs[0] = 1;
      crossings_.push_back({sides[0], sides[1], w, b, id, signs[0]});
    }
    adj_.assign(exterior_ + 1, {});
    for (int i = 0; i < static_cast<int>(crossings_.size()); ++i) {
      adj_[crossings_[i].from].push_back(i);
      if (crossings_[i].to != crossings_[i].from) adj_[crossings_[i].to].push_back(i);
    }
  }

  const Region& region() const { return *region_; }
  int num_nodes() const { return exterior_ + 1; }
  int exterior() const { return exterior_; }
  int node(int quad) const { return node_of_quad_[quad] < 0 ? exterior_ : node_of_quad_[quad]; }
  int quad_of(int node) const { return node == exterior_ ? -1 : quad_of_node_[node]; }
  const std::vector<Crossing>& crossings() const { return crossings_; }
  const std::vector<std::vector<int>>& adjacency() const { return adj_; }

  // A quad of the root face of the patch that lies inside the region.
  int center_quad() const {
    const auto& sg = *region_->sg;
    int f = sg.black_of_face(sg.base().root_face);
    if (f >= 0)
      for (int q : sg.quads_of_black[f])
        if (node_of_quad_[q] >= 0) return q;
    if (quad_of_node_.empty()) throw RegionError("region has no inside face");
    return quad_of_node_.front();
  }

 private:
  const Region* region_;
  std::vector<int> node_of_quad_;
  std::vector<int> quad_of_node_;
  int exterior_ = 0;
  std::vector<Crossing> crossings_;
  std::vector<std::vector<int>> adj_;
};

enum class HeightKind { preliminary, integer };

struct HeightField {
  HeightKind kind = HeightKind::integer;
  const FaceGraph* faces = nullptr;
  int base_node = -1;
  std::vector<double> value;  // per face node, exterior last
  double max_closure_residual = 0.0;

  double at_node(int n) const { return value.at(n); }
  double at(int quad) const { return value.at(faces->node(quad)); }
  long long integer_at(int quad) const { return std::llround(at(quad)); }
  bool is_integer() const {
    for (double x : value)
      if (x != std::round(x)) return false;
    return true;
  }
};

namespace detail {

// Breadth-first integration of increments h(from) − h(to) = inc(crossing),
// then the largest mismatch over every crossing, i.e. over a cycle basis.
template <class Inc>
HeightField integrate(const FaceGraph& fg, int base, bool with_exterior, HeightKind kind, Inc inc) {
  HeightField h;
  h.kind = kind;
  h.faces = &fg;
  h.base_node = base;
  const int n = fg.num_nodes();
  h.value.assign(n, std::numeric_limits<double>::quiet_NaN());
  auto usable = [&](const FaceGraph::Crossing& c) {
    return with_exterior || (c.from != fg.exterior() && c.to != fg.exterior());
  };
  std::vector<int> queue{base};
  h.value[base] = 0.0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    int u = queue[i];
    for (int ci : fg.adjacency()[u]) {
      const auto& c = fg.crossings()[ci];
      if (!usable(c)) continue;
      int v = c.from == u ? c.to : c.from;
      if (!std::isnan(h.value[v])) continue;
      double d = inc(c);
      h.value[v] = c.from == u ? h.value[u] - d : h.value[u] + d;
      queue.push_back(v);
    }
  }
  for (int u = 0; u < n; ++u)
    if (std::isnan(h.value[u]) && (with_exterior || u != fg.exterior()))
      throw RegionError("faces of the region are not connected");
  for (const auto& c : fg.crossings()) {
    if (!usable(c)) continue;
    h.max_closure_residual = std::max(h.max_closure_residual, std::abs(h.value[c.from] - h.value[c.to] - inc(c)));
  }
  return h;
}

inline int membership(const Matching& m, const FaceGraph::Crossing& c) { return m.contains(c.white, c.black) ? 1 : 0; }

}  // namespace detail

// Real-valued height h̄_M, zero on `base_quad` (the center quad by default).
// Crossing f1 -> f2 with the black on the left changes the height by
// −(1 − θ) if the edge is matched and by θ otherwise.
inline HeightField preliminary_height(const FaceGraph& fg, const Matching& m, const AngleFlow& flow,
                                      int base_quad = -1) {
  if (base_quad < 0) base_quad = fg.center_quad();
  int base = fg.node(base_quad);
  if (base == fg.exterior()) throw RegionError("base face lies outside the region");
  auto h = detail::integrate(fg, base, false, HeightKind::preliminary, [&](const FaceGraph::Crossing& c) {
    return -c.sign * (detail::membership(m, c) - flow.theta[c.edge]);
  });
  h.value[fg.exterior()] = std::numeric_limits<double>::quiet_NaN();
  return h;
}

// h_M = h̄_M − h̄_{M0}; integer-valued, zero on the base quad.
inline HeightField dimer_height(const FaceGraph& fg, const Matching& m, const Matching& m0, const AngleFlow& flow,
                                int base_quad = -1) {
  auto a = preliminary_height(fg, m, flow, base_quad);
  auto b = preliminary_height(fg, m0, flow, base_quad);
  HeightField h = a;
  h.kind = HeightKind::integer;
  h.max_closure_residual = std::max(a.max_closure_residual, b.max_closure_residual);
  for (int u = 0; u < fg.exterior(); ++u) {
    double d = a.value[u] - b.value[u];
    if (std::abs(d - std::round(d)) > 1e-8)
      throw InvariantError("height difference is not an integer: " + std::to_string(d));
    h.value[u] = std::round(d);
  }
  return h;
}

// h_{M1,M2} with every face outside the region at height 0.
inline HeightField double_dimer_height(const FaceGraph& fg, const Matching& m1, const Matching& m2) {
  auto h = detail::integrate(fg, fg.exterior(), true, HeightKind::integer, [&](const FaceGraph::Crossing& c) {
    return static_cast<double>(c.sign * (detail::membership(m1, c) - detail::membership(m2, c)));
  });
  if (h.max_closure_residual != 0.0)
    throw InvariantError("double-dimer height does not close; the region exterior is not a single face");
  return h;
}

// One component of M1 △ M2, listed as alternating white/black vertices with
// M1 edges running white -> black.
struct LoopComponent {
  std::vector<int> whites;
  std::vector<int> blacks;  // blacks[i] follows whites[i] through an M1 edge
  bool closed = true;
  int orientation = 0;  // +1 counterclockwise
  int height_sign = 0;  // height change from outside to inside
  std::vector<Point> polygon;
};

struct CycleDecomposition {
  const Region* region = nullptr;
  std::vector<LoopComponent> components;
  std::size_t edge_count() const {
    std::size_t s = 0;
    for (const auto& c : components) s += 2 * c.whites.size() - (c.closed ? 0 : 1);
    return s;
  }
};

inline CycleDecomposition cycle_decomposition(const Matching& m1, const Matching& m2) {
  const Region& r = *m1.region;
  const auto& sg = *r.sg;
  CycleDecomposition d;
  d.region = &r;
  std::vector<int> m2_white_of(sg.num_black(), -1);
  for (int i = 0; i < r.size(); ++i) m2_white_of[m2.black_of[i]] = r.whites[i];
  std::vector<char> done(r.size(), 0);
  for (int i = 0; i < r.size(); ++i) {
    if (done[i] || m1.black_of[i] == m2.black_of[i]) continue;
    LoopComponent c;
    int w = r.whites[i];
    while (!done[r.white_index[w]]) {
      done[r.white_index[w]] = 1;
      int b = m1.black_of_white(w);
      c.whites.push_back(w);
      c.blacks.push_back(b);
      c.polygon.push_back(sg.white_pos[w]);
      c.polygon.push_back(sg.black_pos[b]);
      w = m2_white_of[b];
    }
    double area = 0.0;
    for (std::size_t k = 0; k < c.polygon.size(); ++k) {
      const Point& p = c.polygon[k];
      const Point& q = c.polygon[(k + 1) % c.polygon.size()];
      area += std::imag(std::conj(p) * q);
    }
    c.orientation = area > 0 ? 1 : -1;
    // a counterclockwise loop has its M1 edges with the white on the left when entering
    c.height_sign = -c.orientation;
    d.components.push_back(std::move(c));
  }
  return d;
}

// Even-odd containment test against a closed polygon.
inline bool polygon_contains(const std::vector<Point>& poly, Point p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point &a = poly[i], &b = poly[j];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < x) inside = !inside;
    }
  }
  return inside;
}

inline Point quad_centroid(const SuperpositionGraph& sg, int q) {
  const auto& Q = sg.quads[q];
  return 0.25 * (sg.black_pos[Q.v] + sg.black_pos[Q.f] + sg.white_pos[Q.w1] + sg.white_pos[Q.w2]);
}

inline int enclosing_cycle_count(const CycleDecomposition& d, Point p) {
  int n = 0;
  for (const auto& c : d.components)
    if (c.closed && polygon_contains(c.polygon, p)) ++n;
  return n;
}

inline int enclosing_cycle_count(const CycleDecomposition& d, int quad) {
  return enclosing_cycle_count(d, quad_centroid(*d.region->sg, quad));
}

// Sum of the height signs of the loops around a quad; equals h_{M1,M2} there.
inline int winding_height(const CycleDecomposition& d, int quad) {
  Point p = quad_centroid(*d.region->sg, quad);
  int h = 0;
  for (const auto& c : d.components)
    if (c.closed && polygon_contains(c.polygon, p)) h += c.height_sign;
  return h;
}

struct ClusterLabels {
  std::vector<int> label;  // per face node, exterior last
  std::vector<long long> level;
  std::vector<int> size;
  int count() const { return static_cast<int>(level.size()); }
};

// Connected sets of faces of equal height.
inline ClusterLabels level_clusters(const HeightField& h) {
  const FaceGraph& fg = *h.faces;
  ClusterLabels out;
  out.label.assign(fg.num_nodes(), -1);
  for (int s = 0; s < fg.num_nodes(); ++s) {
    if (out.label[s] >= 0 || std::isnan(h.value[s])) continue;
    int id = out.count();
    out.level.push_back(std::llround(h.value[s]));
    out.size.push_back(0);
    std::vector<int> stack{s};
    out.label[s] = id;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      ++out.size[id];
      for (int ci : fg.adjacency()[u]) {
        const auto& c = fg.crossings()[ci];
        int v = c.from == u ? c.to : c.from;
        if (out.label[v] >= 0 || h.value[v] != h.value[u]) continue;
        out.label[v] = id;
        stack.push_back(v);
      }
    }
  }
  return out;
}

// Exact Var h_{M1,M2}(quad) for independent M1, M2. Along a face path from the
// exterior the height is a signed sum of edge indicators, so the variance is
// twice the quadratic form of their covariance, read off 2×2 inverse minors.
inline double exact_height_variance(const FaceGraph& fg, int quad) {
  const Region& r = fg.region();
  const int target = fg.node(quad);
  if (target == fg.exterior()) return 0.0;
  std::vector<int> via(fg.num_nodes(), -2);
  via[fg.exterior()] = -1;
  std::vector<int> queue{fg.exterior()};
  for (std::size_t i = 0; i < queue.size(); ++i) {
    int u = queue[i];
    for (int ci : fg.adjacency()[u]) {
      const auto& c = fg.crossings()[ci];
      int v = c.from == u ? c.to : c.from;
      if (via[v] != -2) continue;
      via[v] = ci;
      queue.push_back(v);
    }
  }
  if (via[target] == -2) throw RegionError("face is not reachable from the exterior");
  std::vector<std::pair<int, int>> local;
  std::vector<int> coef;
  for (int u = target; u != fg.exterior();) {
    const auto& c = fg.crossings()[via[u]];
    int prev = c.from == u ? c.to : c.from;
    coef.push_back(c.from == prev ? -c.sign : c.sign);
    local.push_back({r.white_index[c.white], r.black_index[c.black]});
    u = prev;
  }
  auto D = build_dirac(r);
  DiracSolver solver(D.M);
  if (solver.singular()) throw LinearAlgebraError("region has no perfect matching (Z = 0)");
  const int L = static_cast<int>(local.size());
  std::vector<Eigen::VectorXcd> col;
  std::vector<double> p(L), mod(L);
  for (int a = 0; a < L; ++a) {
    col.push_back(solver.inverse_column(local[a].first));
    mod[a] = std::abs(D.M(local[a].first, local[a].second));
    p[a] = mod[a] * std::abs(col[a][local[a].second]);
  }
  double var = 0.0;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      double joint;
      if (local[a] == local[b]) {
        joint = p[a];
      } else if (local[a].first == local[b].first || local[a].second == local[b].second) {
        joint = 0.0;
      } else {
        Eigen::Matrix2cd m;
        m << col[a][local[a].second], col[b][local[a].second], col[a][local[b].second], col[b][local[b].second];
        joint = mod[a] * mod[b] * std::abs(m.determinant());
      }
      var += coef[a] * coef[b] * (joint - p[a] * p[b]);
    }
  return 2.0 * var;
}

// ---------------------------------------------------------------------------
// Variance of the double-dimer height at the center face.

enum class Family { pq, grid };

inline std::string to_string(Family f) { return f == Family::grid ? "grid" : "pq"; }

struct ExperimentRegion {
  DoubleCirclePacking packing;  // of the ambient graph
  std::shared_ptr<const SuperpositionGraph> sg;
  Region region;
  int radius = 0;
};

// Temperley trims the largest boundary vertex. Two-corner regions take the
// patch inside an ambient one layer larger, with corners at the given
// positions along the patch boundary cycle (second corner defaults to the
// antipodal position).
struct BoundarySpec {
  RegionKind mode = RegionKind::temperley;
  int first = 0;
  int second = -1;
};

// Region of a {p,q} patch of the given depth, or of square_grid(radius).
using WeightHook = std::function<void(PlanarGraph&)>;

inline ExperimentRegion experiment_region(Family family, int p, int q, int radius, BoundarySpec boundary = {},
                                          const WeightHook& weigh = {}) {
  const bool two = boundary.mode == RegionKind::two_corner;
  if (boundary.mode == RegionKind::custom) throw Error("experiments need a Temperley or two-corner boundary");
  PlanarGraph g = family == Family::grid ? square_grid(two ? radius + 2 : radius)
                                         : build_pq_tiling(p, q, two ? radius + 1 : radius);
  if (weigh) weigh(g);
  Geometry geo = family == Family::grid || !is_hyperbolic(p, q) ? Geometry::euclidean : Geometry::hyperbolic;
  auto P = solve_double_packing(g, geo);
  auto sg = std::make_shared<const SuperpositionGraph>(superpose(g, P));
  if (!two) return {P, sg, temperley_trim(sg), radius};
  std::vector<int> patch;
  if (family == Family::grid) {
    const int n = radius + 2;
    for (int j = 1; j <= radius + 1; ++j)
      for (int i = 1; i <= radius + 1; ++i) patch.push_back(j * (n + 1) + i);
  } else {
    patch = exhaustion(g, {radius}).front().vertices;
  }
  Subgraph sub = induced_subgraph(g, patch);
  std::vector<int> cycle;
  for (int v : sub.graph.boundary_cycle()) cycle.push_back(sub.vertex_of[v]);
  const int L = static_cast<int>(cycle.size());
  int a = ((boundary.first % L) + L) % L;
  int b = boundary.second < 0 ? (a + L / 2) % L : ((boundary.second % L) + L) % L;
  return {P, sg, two_corner_region(sg, patch, cycle[a], cycle[b]), radius};
}

struct VarianceConfig {
  Family family = Family::grid;
  int p = 3;
  int q = 7;
  std::vector<int> radii;
  int samples = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool force_equal = false;  // M1 = M2 control
  bool exact = false;        // also evaluate the variance from the inverse Dirac matrix
  BoundarySpec boundary;
  double stderr_target = 0.1;  // relative
  WeightHook weights;          // applied to each ambient graph before packing
};

struct VarianceRow {
  int radius = 0;
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_var = 0.0;
  int whites = 0;
  double exact = std::numeric_limits<double>::quiet_NaN();  // determinantal value when requested
};

struct VarianceTable {
  VarianceConfig config;
  std::vector<VarianceRow> rows;
  double slope = 0.0;  // variance against log(radius)
  double slope_stderr = 0.0;
  std::vector<std::string> warnings;

  std::string csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "radius,N,mean,var,stderr,slope_fit" << (config.exact ? ",exact_var" : "") << '\n';
    for (const auto& r : rows) {
      os << r.radius << ',' << r.n << ',' << r.mean << ',' << r.variance << ',' << r.stderr_var << ',' << slope;
      if (config.exact) os << ',' << r.exact;
      os << '\n';
    }
    return os.str();
  }
};

// Mean, sample variance and the delta-method standard error of the variance.
inline VarianceRow summarize(int radius, const std::vector<long long>& h) {
  VarianceRow row;
  row.radius = radius;
  row.n = static_cast<int>(h.size());
  if (h.empty()) return row;
  long double s = 0;
  for (long long x : h) s += x;
  long double mean = s / h.size();
  long double m2 = 0, m4 = 0;
  for (long long x : h) {
    long double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const long double n = h.size();
  m2 /= n;
  m4 /= n;
  row.mean = static_cast<double>(mean);
  row.variance = h.size() > 1 ? static_cast<double>(m2 * n / (n - 1)) : 0.0;
  row.stderr_var = static_cast<double>(std::sqrt(std::max<long double>(0, m4 - m2 * m2) / n));
  return row;
}

// Least-squares slope of variance against log(radius), error propagated from the rows.
inline void fit_log_slope(VarianceTable& t) {
  const int k = static_cast<int>(t.rows.size());
  if (k < 2) return;
  double xbar = 0.0;
  for (const auto& r : t.rows) xbar += std::log(static_cast<double>(r.radius)) / k;
  double sxx = 0.0;
  for (const auto& r : t.rows) sxx += std::pow(std::log(static_cast<double>(r.radius)) - xbar, 2);
  double slope = 0.0, var = 0.0;
  for (const auto& r : t.rows) {
    double c = (std::log(static_cast<double>(r.radius)) - xbar) / sxx;
    slope += c * r.variance;
    var += c * c * r.stderr_var * r.stderr_var;
  }
  t.slope = slope;
  t.slope_stderr = std::sqrt(var);
}

// Heights at the center face for `n` independent pairs on one region; sample
// k uses streams derived from (seed, tag, k) whatever the worker count.
inline std::vector<long long> center_heights(const Region& r, int n, std::uint64_t seed, const std::string& tag,
                                             int jobs = 1, bool force_equal = false) {
  MatchingSampler sampler(r);
  FaceGraph fg(r);
  const int center = fg.center_quad();
  std::vector<long long> h(n, 0);
  auto work = [&](int j, int stride) {
    for (int k = j; k < n; k += stride) {
      Rng a = make_rng(seed, tag + "/first", k);
      Rng b = make_rng(seed, tag + "/second", k);
      auto m1 = sampler.sample(a);
      auto m2 = force_equal ? m1 : sampler.sample(b);
      h[k] = double_dimer_height(fg, m1, m2).integer_at(center);
    }
  };
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
    for (auto& t : pool) t.join();
  }
  return h;
}

inline VarianceTable variance_experiment(const VarianceConfig& cfg) {
  if (cfg.radii.empty()) throw Error("radius schedule is empty");
  if (cfg.samples < 2) throw Error("need at least two samples per radius");
  VarianceTable t;
  t.config = cfg;
  for (int radius : cfg.radii) {
    auto ex = experiment_region(cfg.family, cfg.p, cfg.q, radius, cfg.boundary, cfg.weights);
    std::string tag = to_string(cfg.family) + "/" + std::to_string(cfg.p) + "," + std::to_string(cfg.q) + "/" +
                      std::to_string(radius);
    auto h = center_heights(ex.region, cfg.samples, cfg.seed, tag, cfg.jobs, cfg.force_equal);
    auto row = summarize(radius, h);
    row.whites = ex.region.size();
    if (cfg.exact) {
      FaceGraph fg(ex.region);
      row.exact = cfg.force_equal ? 0.0 : exact_height_variance(fg, fg.center_quad());
    }
    if (row.variance > 0 && row.stderr_var > cfg.stderr_target * row.variance)
      t.warnings.push_back("radius " + std::to_string(radius) + ": N=" + std::to_string(cfg.samples) +
                           " too small for the relative stderr target");
    t.rows.push_back(row);
  }
  fit_log_slope(t);
  return t;
}

}  // namespace hypdimer
