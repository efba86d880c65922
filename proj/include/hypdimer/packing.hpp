#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/hyperbolic.hpp"
#include "hypdimer/lattice.hpp"

namespace hypdimer {

enum class Geometry { euclidean, hyperbolic };

inline const char* to_string(Geometry g) { return g == Geometry::euclidean ? "euclidean" : "hyperbolic"; }

struct BoundaryCondition {
  double radius = 1.0;         // uniform boundary radius (native units)
  std::vector<double> radii;   // per-vertex override when non-empty; only boundary entries are read

  static BoundaryCondition uniform(double r) { return {r, {}}; }
  static BoundaryCondition prescribed(std::vector<double> r) { return {0.0, std::move(r)}; }
};

// Circle centres and radii live in the Euclidean chart (the Poincaré disk in
// the hyperbolic case); `*_native` keeps the hyperbolic radii.
struct DoubleCirclePacking {
  Geometry geometry = Geometry::euclidean;
  std::vector<Point> vertex_center;
  std::vector<double> vertex_radius;
  std::vector<double> vertex_native;
  std::vector<Point> face_center;  // indexed by face id; the outer face is left at NaN
  std::vector<double> face_radius;
  std::vector<double> face_native;
  std::vector<Point> tangency;  // per edge
  int iterations = 0;
  double max_residual = 0.0;
  std::vector<double> residual_history;
};

struct RegularRadii {
  double vertex;
  double face;
};

// Radii of the regular {p,q} packing: every kite has angle π/q at the vertex
// and π/p at the face.
inline RegularRadii regular_radii(int p, int q) {
  const double pi = std::numbers::pi;
  if (!is_hyperbolic(p, q)) return {1.0, std::tan(pi / q)};
  return {std::acosh(std::cos(pi / p) / std::sin(pi / q)), std::acosh(std::cos(pi / q) / std::sin(pi / p))};
}

namespace detail {

// Half of the kite angle at a circle of native radius rx facing one of radius ry.
inline double kite_half_angle(Geometry g, double rx, double ry) {
  if (g == Geometry::euclidean) return std::atan2(ry, rx);
  return std::atan(std::tanh(ry) / std::sinh(rx));
}

// Derivatives of the half angle with respect to log rx and log ry.
inline std::pair<double, double> kite_half_angle_grad(Geometry g, double rx, double ry) {
  if (g == Geometry::euclidean) {
    double s = ry / rx;
    double d = s / (1.0 + s * s);
    return {-d, d};
  }
  double sx = std::sinh(rx), cx = std::cosh(rx), ty = std::tanh(ry), cy = std::cosh(ry);
  double t = ty / sx;
  double w = 1.0 / (1.0 + t * t);
  double dx = -ty * cx / (sx * sx);
  double dy = 1.0 / (cy * cy * sx);
  return {w * dx * rx, w * dy * ry};
}

// Vertex/face incidence used by the kite equations. Node ids: vertices first,
// then faces. Neighbour lists are in counterclockwise order; for a boundary
// vertex the list starts just after the outer face.
struct KiteGraph {
  int num_vertices = 0;
  std::vector<std::vector<int>> neighbors;
  std::vector<char> cyclic;

  int node_of_face(int f) const { return num_vertices + f; }
};

inline KiteGraph kite_graph(const PlanarGraph& g) {
  KiteGraph k;
  k.num_vertices = g.num_vertices;
  const int n = g.num_vertices + g.num_faces();
  k.neighbors.assign(n, {});
  k.cyclic.assign(n, 1);
  for (int v = 0; v < g.num_vertices; ++v) {
    const auto& rot = g.rotation[v];
    int deg = static_cast<int>(rot.size());
    int start = 0;
    for (int i = 0; i < deg; ++i)
      if (g.face[rot[i]] == g.outer_face) {
        start = i + 1;
        k.cyclic[v] = 0;
      }
    for (int j = 0; j < deg; ++j) {
      int f = g.face[rot[(start + j) % deg]];
      if (f != g.outer_face) k.neighbors[v].push_back(k.node_of_face(f));
    }
  }
  for (int f = 0; f < g.num_faces(); ++f) {
    if (f == g.outer_face) continue;
    for (int h : g.faces[f]) k.neighbors[k.node_of_face(f)].push_back(g.origin[h]);
  }
  return k;
}

}  // namespace detail

// Angle-sum residual of every node carrying an equation.
inline std::vector<double> packing_residuals(const PlanarGraph& g, Geometry geo, const std::vector<double>& native,
                                             const std::vector<char>& has_equation) {
  auto k = detail::kite_graph(g);
  std::vector<double> res(native.size(), 0.0);
  for (std::size_t x = 0; x < native.size(); ++x) {
    if (!has_equation[x]) continue;
    double s = 0.0;
    for (int y : k.neighbors[x]) s += 2.0 * detail::kite_half_angle(geo, native[x], native[y]);
    res[x] = s - 2.0 * std::numbers::pi;
  }
  return res;
}

namespace detail {

inline void layout_packing(const PlanarGraph& g, const KiteGraph& k, DoubleCirclePacking& P, std::vector<double>& native) {
  const int nv = g.num_vertices;
  const int n = static_cast<int>(native.size());
  const Geometry geo = P.geometry;
  std::vector<Point> center(n, Point(std::nan(""), std::nan("")));
  std::vector<char> placed(n, 0);
  auto dist = [&](int x, int y) {
    if (geo == Geometry::euclidean) return std::hypot(native[x], native[y]);
    return std::acosh(std::cosh(native[x]) * std::cosh(native[y]));
  };
  auto shoot = [&](int x, double phi, double d) {
    if (geo == Geometry::euclidean) return center[x] + std::polar(d, phi);
    return disk::shoot(center[x], phi, d);
  };
  auto direction = [&](int x, int y) {
    if (geo == Geometry::euclidean) return std::arg(center[y] - center[x]);
    return disk::direction(center[x], center[y]);
  };
  auto half = [&](int x, int y) { return kite_half_angle(geo, native[x], native[y]); };

  if (g.root_face == g.outer_face) throw PackingError("root face must be an inner face", 0.0, -1);
  const int root = k.node_of_face(g.root_face);
  center[root] = Point(0.0, 0.0);
  placed[root] = 1;
  {
    int y0 = k.neighbors[root].front();
    double phi = g.position.empty() ? std::numbers::pi / 2 : std::arg(g.position[y0]);
    if (!g.position.empty()) {
      // align with the reference layout around the root face
      Point mean(0.0, 0.0);
      for (int y : k.neighbors[root]) mean += g.position[y];
      mean /= static_cast<double>(k.neighbors[root].size());
      phi = std::arg(g.position[y0] - mean);
    }
    center[y0] = shoot(root, phi, dist(root, y0));
    placed[y0] = 1;
  }
  std::queue<int> queue;
  queue.push(root);
  queue.push(k.neighbors[root].front());
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop();
    const auto& nb = k.neighbors[x];
    const int m = static_cast<int>(nb.size());
    int anchor = -1;
    for (int i = 0; i < m && anchor < 0; ++i)
      if (placed[nb[i]]) anchor = i;
    if (anchor < 0) continue;
    const double base = direction(x, nb[anchor]);
    auto place = [&](int y, double phi) {
      if (placed[y]) return;
      center[y] = shoot(x, phi, dist(x, y));
      placed[y] = 1;
      queue.push(y);
    };
    if (k.cyclic[x]) {
      double phi = base;
      for (int s = 1; s < m; ++s) {
        int a = nb[(anchor + s - 1) % m], b = nb[(anchor + s) % m];
        phi += half(x, a) + half(x, b);
        place(b, phi);
      }
    } else {
      double phi = base;
      for (int i = anchor + 1; i < m; ++i) {
        phi += half(x, nb[i - 1]) + half(x, nb[i]);
        place(nb[i], phi);
      }
      phi = base;
      for (int i = anchor - 1; i >= 0; --i) {
        phi -= half(x, nb[i + 1]) + half(x, nb[i]);
        place(nb[i], phi);
      }
    }
  }
  for (int x = 0; x < n; ++x)
    if (!placed[x] && !(x >= nv && x - nv == g.outer_face))
      throw PackingError("layout did not reach every circle", 0.0, x < nv ? x : -1);

  P.vertex_center.resize(nv);
  P.vertex_radius.resize(nv);
  P.vertex_native.assign(native.begin(), native.begin() + nv);
  P.face_center.assign(g.num_faces(), Point(std::nan(""), std::nan("")));
  P.face_radius.assign(g.num_faces(), std::nan(""));
  P.face_native.assign(g.num_faces(), std::nan(""));
  auto chart = [&](int x, Point& c, double& r) {
    if (geo == Geometry::euclidean) {
      c = center[x];
      r = native[x];
    } else {
      auto circ = disk::circle(center[x], native[x]);
      c = circ.center;
      r = circ.radius;
    }
  };
  for (int v = 0; v < nv; ++v) chart(v, P.vertex_center[v], P.vertex_radius[v]);
  for (int f = 0; f < g.num_faces(); ++f) {
    if (f == g.outer_face) continue;
    chart(k.node_of_face(f), P.face_center[f], P.face_radius[f]);
    P.face_native[f] = native[k.node_of_face(f)];
  }
  P.tangency.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    int u = g.tail_of_edge(e), v = g.head_of_edge(e);
    Point d = P.vertex_center[v] - P.vertex_center[u];
    P.tangency[e] = P.vertex_center[u] + P.vertex_radius[u] * d / std::abs(d);
  }
}

}  // namespace detail

// Solves for the double circle packing with fixed boundary radii by Newton's
// method on log radii, then lays the circles out breadth-first from the root face.
inline DoubleCirclePacking solve_double_packing(const PlanarGraph& g, Geometry geo,
                                                const BoundaryCondition& bc = BoundaryCondition::uniform(1.0),
                                                double tol = -1.0, int max_iter = 200) {
  if (tol <= 0.0) tol = geo == Geometry::euclidean ? 1e-10 : 1e-8;
  if (g.outer_face < 0) throw PackingError("packing needs a marked outer face", 0.0, -1);
  const int nv = g.num_vertices;
  const int n = nv + g.num_faces();
  auto k = detail::kite_graph(g);
  auto boundary = g.boundary_flags();
  std::vector<char> unknown(n, 0);
  for (int v = 0; v < nv; ++v) unknown[v] = !boundary[v];
  for (int f = 0; f < g.num_faces(); ++f) unknown[nv + f] = f != g.outer_face;

  std::vector<double> native(n, 0.0);
  double mean = 0.0;
  int nb = 0;
  for (int v = 0; v < nv; ++v) {
    if (!boundary[v]) continue;
    double r = bc.radii.empty() ? bc.radius : bc.radii.at(v);
    if (!(r > 0.0) || !std::isfinite(r)) throw PackingError("boundary radius must be positive", r, v);
    native[v] = r;
    mean += r;
    ++nb;
  }
  mean = nb ? mean / nb : 1.0;
  for (int x = 0; x < n; ++x)
    if (unknown[x]) native[x] = mean;
  native[nv + g.outer_face] = mean;  // never read by an equation

  std::vector<int> col(n, -1);
  int m = 0;
  for (int x = 0; x < n; ++x)
    if (unknown[x]) col[x] = m++;

  DoubleCirclePacking P;
  P.geometry = geo;
  auto residual = [&](const std::vector<double>& r) {
    auto res = packing_residuals(g, geo, r, unknown);
    double worst = 0.0;
    for (double x : res) worst = std::max(worst, std::abs(x));
    return std::pair{res, worst};
  };
  auto [res, worst] = residual(native);
  P.residual_history.push_back(worst);
  int it = 0, polish = 0;
  while (it < max_iter) {
    // a few extra Newton steps past tol cost little and tighten the layout
    if (worst <= tol && (polish++ >= 3 || worst < 1e-14)) break;
    ++it;
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs(m);
    for (int x = 0; x < n; ++x) {
      if (!unknown[x]) continue;
      rhs[col[x]] = -res[x];
      for (int y : k.neighbors[x]) {
        auto [dx, dy] = detail::kite_half_angle_grad(geo, native[x], native[y]);
        trips.emplace_back(col[x], col[x], 2.0 * dx);
        if (unknown[y]) trips.emplace_back(col[x], col[y], 2.0 * dy);
      }
    }
    Eigen::SparseMatrix<double> J(m, m);
    J.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw PackingError("singular packing Jacobian", worst, -1);
    Eigen::VectorXd step = lu.solve(rhs);
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      std::vector<double> trial = native;
      bool finite = true;
      for (int x = 0; x < n; ++x) {
        if (!unknown[x]) continue;
        double u = std::log(native[x]) + t * step[col[x]];
        trial[x] = std::exp(u);
        if (!(trial[x] > 1e-300) || !std::isfinite(trial[x])) finite = false;
      }
      if (!finite) continue;
      auto [r2, w2] = residual(trial);
      if (w2 < worst || w2 <= tol) {
        native = std::move(trial);
        res = std::move(r2);
        worst = w2;
        accepted = true;
        break;
      }
    }
    P.residual_history.push_back(worst);
    if (!accepted) break;
  }
  for (int x = 0; x < n; ++x)
    if (unknown[x] && (!(native[x] > 1e-300) || !std::isfinite(native[x])))
      throw PackingError("radius underflow", worst, x < nv ? x : -1);
  if (worst > tol) {
    int node = -1;
    for (int x = 0; x < n; ++x)
      if (std::abs(res[x]) == worst) node = x;
    throw PackingError("packing did not converge (worst angle residual " + std::to_string(worst) + ")", worst,
                       node < nv ? node : -1);
  }
  P.iterations = it;
  P.max_residual = worst;
  detail::layout_packing(g, k, P, native);
  return P;
}

struct PackingReport {
  double tangency = 0.0;
  double orthogonality = 0.0;
  double dual_tangency = 0.0;
  double perpendicularity = 0.0;  // |cos| of the angle between dual edge segments
  double overlap = 0.0;           // worst interior overlap of non-adjacent circles
  double tol = 0.0;
  bool passed = false;
};

// Checks every packing invariant in chart coordinates. Residuals are absolute
// except tangency and overlap, which are measured relative to the radii involved.
inline PackingReport certify(const PlanarGraph& g, const DoubleCirclePacking& P, double tol) {
  PackingReport r;
  r.tol = tol;
  const auto& c = P.vertex_center;
  const auto& rad = P.vertex_radius;
  for (int e = 0; e < g.num_edges(); ++e) {
    int u = g.tail_of_edge(e), v = g.head_of_edge(e);
    r.tangency = std::max(r.tangency, std::abs(std::abs(c[u] - c[v]) - rad[u] - rad[v]) / (rad[u] + rad[v]));
    int f1 = g.left_face(e), f2 = g.right_face(e);
    Point t = P.tangency[e];
    for (int f : {f1, f2}) {
      if (f == g.outer_face) continue;
      // the dual circle passes through the tangency point
      r.dual_tangency = std::max(r.dual_tangency, std::abs(std::abs(P.face_center[f] - t) - P.face_radius[f]));
    }
    if (f1 != g.outer_face && f2 != g.outer_face) {
      Point df = P.face_center[f1] - P.face_center[f2];
      double gap = std::abs(std::abs(df) - P.face_radius[f1] - P.face_radius[f2]);
      r.dual_tangency = std::max(r.dual_tangency, gap);
      Point de = c[v] - c[u];
      double cosang = std::abs((std::conj(de) * df).real()) / (std::abs(de) * std::abs(df));
      r.perpendicularity = std::max(r.perpendicularity, cosang);
    }
  }
  for (int f = 0; f < g.num_faces(); ++f) {
    if (f == g.outer_face) continue;
    for (int h : g.faces[f]) {
      int v = g.origin[h];
      double d2 = std::norm(c[v] - P.face_center[f]);
      r.orthogonality =
          std::max(r.orthogonality, std::abs(d2 - rad[v] * rad[v] - P.face_radius[f] * P.face_radius[f]));
    }
  }
  // pairwise interiors: primal circles among themselves, dual circles among themselves
  auto overlap_scan = [&](const std::vector<Point>& cs, const std::vector<double>& rs, auto&& adjacent) {
    const int n = static_cast<int>(cs.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return cs[a].real() - rs[a] < cs[b].real() - rs[b]; });
    for (int i = 0; i < n; ++i) {
      int a = order[i];
      if (!std::isfinite(rs[a])) continue;
      for (int j = i + 1; j < n; ++j) {
        int b = order[j];
        if (!std::isfinite(rs[b])) continue;
        if (cs[b].real() - rs[b] > cs[a].real() + rs[a]) break;
        double d = std::abs(cs[a] - cs[b]);
        double over = (rs[a] + rs[b] - d) / std::min(rs[a], rs[b]);
        if (adjacent(a, b)) continue;
        r.overlap = std::max(r.overlap, over);
      }
    }
  };
  std::vector<std::vector<int>> vnb(g.num_vertices), fnb(g.num_faces());
  for (int e = 0; e < g.num_edges(); ++e) {
    vnb[g.tail_of_edge(e)].push_back(g.head_of_edge(e));
    vnb[g.head_of_edge(e)].push_back(g.tail_of_edge(e));
    fnb[g.left_face(e)].push_back(g.right_face(e));
    fnb[g.right_face(e)].push_back(g.left_face(e));
  }
  auto is_in = [](const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); };
  overlap_scan(c, rad, [&](int a, int b) { return is_in(vnb[a], b); });
  overlap_scan(P.face_center, P.face_radius, [&](int a, int b) { return is_in(fnb[a], b); });
  r.passed = r.tangency < tol && r.orthogonality < tol && r.dual_tangency < tol && r.perpendicularity < tol &&
             r.overlap < tol;
  return r;
}

// m(e) = r_u + r_v in native radii.
inline std::vector<double> edge_metric(const PlanarGraph& g, const DoubleCirclePacking& P) {
  std::vector<double> m(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e)
    m[e] = P.vertex_native[g.tail_of_edge(e)] + P.vertex_native[g.head_of_edge(e)];
  return m;
}

// Boundary condition reproducing the regular packing on a {p,q} patch.
inline BoundaryCondition regular_boundary(int p, int q) { return BoundaryCondition::uniform(regular_radii(p, q).vertex); }

}  // namespace hypdimer
