#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/lattice.hpp"
#include "hypdimer/packing.hpp"

namespace hypdimer {

// Bipartite superposition of a patch and its interior dual. Black ids: primal
// vertex v is v, inner face f is num_vertices + dual_index[f]. White id = edge id.
struct SuperpositionGraph {
  struct Edge {
    int white;
    int black;
    bool primal;
  };
  // Quadrilateral (v, w1, f, w2) listed counterclockwise.
  struct Quad {
    int v;
    int w1;
    int f;
    int w2;
  };

  std::shared_ptr<const PlanarGraph> graph;
  Geometry geometry = Geometry::euclidean;
  int num_vertices = 0;
  std::vector<int> dual_index;  // face id -> dual slot, -1 for the outer face
  std::vector<int> face_of_dual;
  std::vector<Point> black_pos;
  std::vector<Point> white_pos;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> white_edges;  // Ḡ edge ids at each white
  std::vector<std::vector<int>> black_edges;
  std::vector<Quad> quads;
  std::vector<std::vector<int>> quads_of_white;
  std::vector<std::vector<int>> quads_of_black;

  int num_white() const { return static_cast<int>(white_pos.size()); }
  int num_black() const { return static_cast<int>(black_pos.size()); }
  bool is_primal(int b) const { return b < num_vertices; }
  int black_of_face(int f) const { return dual_index[f] < 0 ? -1 : num_vertices + dual_index[f]; }
  int face_of_black(int b) const { return face_of_dual[b - num_vertices]; }
  const PlanarGraph& base() const { return *graph; }

  // The two primal and two dual endpoints of a white (-1 where absent).
  std::array<int, 2> primal_ends(int w) const { return {graph->tail_of_edge(w), graph->head_of_edge(w)}; }
  std::array<int, 2> dual_ends(int w) const { return {black_of_face(graph->left_face(w)), black_of_face(graph->right_face(w))}; }
  // ν of the G or G⁺ edge through w ending at b
  double weight(int w, int b) const { return is_primal(b) ? graph->nu[w] : graph->nu_dual[w]; }
  bool adjacent(int w, int b) const {
    for (int id : white_edges[w])
      if (edges[id].black == b) return true;
    return false;
  }
};

inline SuperpositionGraph superpose(const PlanarGraph& g, const DoubleCirclePacking& P, double tol = -1.0) {
  if (tol <= 0.0) tol = P.geometry == Geometry::euclidean ? 1e-9 : 1e-7;
  auto report = certify(g, P, tol);
  if (!report.passed) throw PackingError("packing failed certification", P.max_residual, -1);
  SuperpositionGraph sg;
  sg.graph = std::make_shared<const PlanarGraph>(g);
  sg.geometry = P.geometry;
  sg.num_vertices = g.num_vertices;
  sg.dual_index.assign(g.num_faces(), -1);
  for (int f = 0; f < g.num_faces(); ++f) {
    if (f == g.outer_face) continue;
    sg.dual_index[f] = static_cast<int>(sg.face_of_dual.size());
    sg.face_of_dual.push_back(f);
  }
  sg.black_pos = P.vertex_center;
  for (int f : sg.face_of_dual) sg.black_pos.push_back(P.face_center[f]);
  sg.white_pos = P.tangency;
  const int W = g.num_edges(), B = sg.num_black();
  sg.white_edges.assign(W, {});
  sg.black_edges.assign(B, {});
  auto link = [&](int w, int b, bool primal) {
    if (b < 0) return;
    int id = static_cast<int>(sg.edges.size());
    sg.edges.push_back({w, b, primal});
    sg.white_edges[w].push_back(id);
    sg.black_edges[b].push_back(id);
  };
  for (int w = 0; w < W; ++w) {
    link(w, g.tail_of_edge(w), true);
    link(w, g.head_of_edge(w), true);
    link(w, sg.black_of_face(g.left_face(w)), false);
    link(w, sg.black_of_face(g.right_face(w)), false);
  }
  sg.quads_of_white.assign(W, {});
  sg.quads_of_black.assign(B, {});
  for (int v = 0; v < g.num_vertices; ++v)
    for (int h : g.rotation[v]) {
      int f = g.face[h];
      if (f == g.outer_face) continue;
      SuperpositionGraph::Quad q{v, h >> 1, sg.black_of_face(f), g.ccw(h) >> 1};
      int id = static_cast<int>(sg.quads.size());
      sg.quads.push_back(q);
      sg.quads_of_white[q.w1].push_back(id);
      sg.quads_of_white[q.w2].push_back(id);
      sg.quads_of_black[q.v].push_back(id);
      sg.quads_of_black[q.f].push_back(id);
    }
  return sg;
}

enum class RegionKind { temperley, two_corner, custom };
enum class Corner { interior, convex, concave, flat };

struct BoundaryProfile {
  std::vector<Corner> corner;  // per white of the superposition; interior for inactive
  int convex = 0;
  int concave = 0;
  int flat = 0;
  int b0 = -1;
  int v1 = -1;
  int v2 = -1;
  std::vector<int> removed_faces;   // ring faces deleted along the arc (face ids of the base graph)
  std::vector<int> removed_whites;  // outward edges deleted between them
};

// A set of active white and black vertices of a superposition graph.
struct Region {
  std::shared_ptr<const SuperpositionGraph> sg;
  RegionKind kind = RegionKind::custom;
  std::vector<char> white_active;
  std::vector<char> black_active;
  std::vector<int> whites;  // sorted active ids
  std::vector<int> blacks;
  std::vector<int> white_index;  // global -> local, -1 if inactive
  std::vector<int> black_index;
  BoundaryProfile profile;

  int size() const { return static_cast<int>(whites.size()); }
  bool balanced() const { return whites.size() == blacks.size(); }

  // Active black neighbours of an active white, in Ḡ-edge order.
  std::vector<int> neighbors(int w) const {
    std::vector<int> out;
    for (int id : sg->white_edges[w]) {
      int b = sg->edges[id].black;
      if (black_active[b]) out.push_back(b);
    }
    return out;
  }

  bool quad_inside(int q) const {
    const auto& Q = sg->quads[q];
    return black_active[Q.v] && black_active[Q.f] && white_active[Q.w1] && white_active[Q.w2];
  }
};

namespace detail {

inline void index_region(Region& r) {
  r.whites.clear();
  r.blacks.clear();
  r.white_index.assign(r.white_active.size(), -1);
  r.black_index.assign(r.black_active.size(), -1);
  for (int w = 0; w < static_cast<int>(r.white_active.size()); ++w)
    if (r.white_active[w]) {
      r.white_index[w] = static_cast<int>(r.whites.size());
      r.whites.push_back(w);
    }
  for (int b = 0; b < static_cast<int>(r.black_active.size()); ++b)
    if (r.black_active[b]) {
      r.black_index[b] = static_cast<int>(r.blacks.size());
      r.blacks.push_back(b);
    }
}

}  // namespace detail

// Labels each active white: concave if some quad has w and both blacks inside
// but the opposite white missing; otherwise convex when exactly one of its
// quads lies inside; flat for the remaining boundary whites.
inline BoundaryProfile classify_corners(const Region& r) {
  BoundaryProfile p = r.profile;
  const auto& sg = *r.sg;
  p.corner.assign(sg.num_white(), Corner::interior);
  p.convex = p.concave = p.flat = 0;
  for (int w : r.whites) {
    bool boundary = sg.white_edges[w].size() < 4 || sg.quads_of_white[w].size() < 4;
    for (int id : sg.white_edges[w]) boundary = boundary || !r.black_active[sg.edges[id].black];
    int inside = 0;
    bool concave = false;
    for (int q : sg.quads_of_white[w]) {
      const auto& Q = sg.quads[q];
      int other = Q.w1 == w ? Q.w2 : Q.w1;
      if (!r.white_active[other]) boundary = true;
      if (r.quad_inside(q)) ++inside;
      if (r.black_active[Q.v] && r.black_active[Q.f] && !r.white_active[other]) concave = true;
    }
    if (!boundary) continue;
    if (concave) {
      p.corner[w] = Corner::concave;
      ++p.concave;
    } else if (inside == 1) {
      p.corner[w] = Corner::convex;
      ++p.convex;
    } else {
      p.corner[w] = Corner::flat;
      ++p.flat;
    }
  }
  return p;
}

// Augmenting-path check for a perfect matching between active whites and blacks.
inline bool has_perfect_matching(const Region& r) {
  if (!r.balanced()) return false;
  const int n = r.size();
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int b : r.neighbors(r.whites[i])) adj[i].push_back(r.black_index[b]);
  std::vector<int> match_black(n, -1);
  for (int i = 0; i < n; ++i) {
    std::vector<char> seen(n, 0);
    auto augment = [&](auto&& self, int u) -> bool {
      for (int b : adj[u]) {
        if (seen[b]) continue;
        seen[b] = 1;
        if (match_black[b] < 0 || self(self, match_black[b])) {
          match_black[b] = u;
          return true;
        }
      }
      return false;
    };
    if (!augment(augment, i)) return false;
  }
  return true;
}

inline Region make_region(std::shared_ptr<const SuperpositionGraph> sg, std::vector<char> white_active,
                          std::vector<char> black_active, RegionKind kind) {
  Region r;
  r.sg = std::move(sg);
  r.kind = kind;
  r.white_active = std::move(white_active);
  r.black_active = std::move(black_active);
  detail::index_region(r);
  r.profile = classify_corners(r);
  return r;
}

// Boundary primal vertex of largest id.
inline int default_b0(const SuperpositionGraph& sg) {
  auto boundary = sg.base().boundary_flags();
  for (int v = sg.num_vertices - 1; v >= 0; --v)
    if (boundary[v]) return v;
  throw RegionError("patch has no boundary vertex");
}

// Removes the boundary primal vertex b0 from the full superposition.
inline Region temperley_trim(std::shared_ptr<const SuperpositionGraph> sg, std::optional<int> b0_opt = std::nullopt) {
  int b0 = b0_opt.value_or(default_b0(*sg));
  if (b0 < 0 || b0 >= sg->num_vertices) throw RegionError("b0 must be a primal vertex");
  if (!sg->base().boundary_flags()[b0]) throw RegionError("b0 must lie on the outer boundary");
  std::vector<char> wa(sg->num_white(), 1), ba(sg->num_black(), 1);
  ba[b0] = 0;
  Region r = make_region(std::move(sg), std::move(wa), std::move(ba), RegionKind::temperley);
  r.profile.b0 = b0;
  if (!r.balanced())
    throw RegionError("trimmed region is unbalanced: " + std::to_string(r.whites.size()) + " whites, " +
                      std::to_string(r.blacks.size()) + " blacks");
  return r;
}

inline Region temperley_trim(const SuperpositionGraph& sg, std::optional<int> b0 = std::nullopt) {
  return temperley_trim(std::make_shared<const SuperpositionGraph>(sg), b0);
}

// Region spanned by a set of superposition quads.
inline Region region_from_quads(std::shared_ptr<const SuperpositionGraph> sg, const std::vector<int>& quad_ids) {
  std::vector<char> wa(sg->num_white(), 0), ba(sg->num_black(), 0);
  for (int q : quad_ids) {
    const auto& Q = sg->quads.at(q);
    ba[Q.v] = ba[Q.f] = 1;
    wa[Q.w1] = wa[Q.w2] = 1;
  }
  return make_region(std::move(sg), std::move(wa), std::move(ba), RegionKind::custom);
}

// Superposition of the patch spanned by `patch_vertices` with its enlarged dual
// (the ring of ambient faces around the patch), minus the ring faces on the
// boundary arc strictly between v1 and v2 (counterclockwise) and the outward
// edges separating them. The ambient graph of `sg` must extend past the ring.
inline Region two_corner_region(std::shared_ptr<const SuperpositionGraph> sg, const std::vector<int>& patch_vertices,
                                int v1, int v2) {
  const PlanarGraph& G = sg->base();
  if (v1 == v2) throw RegionError("corner vertices must differ");
  Subgraph patch = induced_subgraph(G, patch_vertices);
  std::vector<int> cycle;
  for (int v : patch.graph.boundary_cycle()) cycle.push_back(patch.vertex_of[v]);
  const int L = static_cast<int>(cycle.size());
  {
    std::set<int> distinct(cycle.begin(), cycle.end());
    if (static_cast<int>(distinct.size()) != L) throw RegionError("patch boundary is not a simple cycle");
  }
  auto pos = [&](int v) {
    auto it = std::find(cycle.begin(), cycle.end(), v);
    if (it == cycle.end()) throw RegionError("corner vertex " + std::to_string(v) + " is not on the patch boundary");
    return static_cast<int>(it - cycle.begin());
  };
  const int i1 = pos(v1), i2 = pos(v2);
  std::vector<char> in_patch(G.num_vertices, 0), side(G.num_vertices, -1);  // side: 0 = C0, 1 = C1
  for (int v : patch.vertex_of) in_patch[v] = 1;
  for (int s = 1; (i1 + s) % L != i2; ++s) side[cycle[(i1 + s) % L]] = 1;
  for (int s = 1; (i2 + s) % L != i1; ++s) side[cycle[(i2 + s) % L]] = 0;

  // ring faces and outward edges in cyclic order around the patch
  std::vector<int> ring_faces, ring_whites;  // ring_whites[k] separates ring_faces[k] and ring_faces[k+1]
  auto half_to = [&](int a, int b) {
    for (int h : G.rotation[a])
      if (G.head(h) == b) return h;
    throw RegionError("patch boundary edge missing");
  };
  for (int i = 0; i < L; ++i) {
    int v = cycle[i], prev = cycle[(i - 1 + L) % L], next = cycle[(i + 1) % L];
    int h_prev = half_to(v, prev), h_next = half_to(v, next);
    for (int x = h_prev;; x = G.ccw(x)) {
      if (x != h_prev) ring_whites.push_back(x >> 1);
      int f = G.face[x];
      if (f == G.outer_face) throw RegionError("patch touches the boundary of the ambient graph");
      if (ring_faces.empty() || ring_faces.back() != f) ring_faces.push_back(f);
      if (G.ccw(x) == h_next) break;
    }
  }
  if (ring_faces.size() > 1 && ring_faces.front() == ring_faces.back()) ring_faces.pop_back();
  const int R = static_cast<int>(ring_faces.size());
  if (static_cast<int>(ring_whites.size()) != R) throw RegionError("enlarged dual boundary is not a simple cycle");
  {
    std::set<int> distinct(ring_faces.begin(), ring_faces.end());
    if (static_cast<int>(distinct.size()) != R) throw RegionError("enlarged dual boundary is not a simple cycle");
  }
  // Ring white k sits between faces k and k+1 once the face list is rotated to
  // start at the face across the first boundary edge.
  std::vector<char> touch0(R, 0), touch1(R, 0), touch_v1(R, 0), touch_v2(R, 0);
  for (int k = 0; k < R; ++k)
    for (int u : G.face_vertices(ring_faces[k])) {
      if (!in_patch[u]) continue;
      if (side[u] == 0) touch0[k] = 1;
      if (side[u] == 1) touch1[k] = 1;
      if (u == v1) touch_v1[k] = 1;
      if (u == v2) touch_v2[k] = 1;
    }
  std::vector<char> removed(R, 0);
  int first = -1, count = 0;
  for (int k = 0; k < R; ++k) removed[k] = touch1[k] && !touch0[k];
  for (int k = 0; k < R; ++k) {
    count += removed[k];
    if (removed[k] && !removed[(k - 1 + R) % R]) {
      if (first >= 0) throw RegionError("deleted ring faces do not form a single arc");
      first = k;
    }
  }
  if (count == 0) throw RegionError("no ring face lies between the corners");
  if (count == R) throw RegionError("the deleted arc covers the whole ring");
  const int before = (first - 1 + R) % R, after = (first + count) % R;
  // the kept faces flanking the arc play the role of the dual corner vertices
  if (!((touch_v1[before] && touch_v2[after]) || (touch_v2[before] && touch_v1[after])))
    throw RegionError("faces flanking the deleted arc do not meet the corner vertices");
  for (int k = 0; k < R; ++k)
    if (!removed[k] && touch1[k] && k != before && k != after)
      throw RegionError("a kept ring face touches the deleted side of the boundary");

  std::vector<char> wa(sg->num_white(), 0), ba(sg->num_black(), 0);
  for (int e : patch.edge_of) wa[e] = 1;
  for (int v : patch.vertex_of) ba[v] = 1;
  for (int f = 0; f < patch.graph.num_faces(); ++f)
    if (f != patch.graph.outer_face) ba[sg->black_of_face(patch.face_of[f])] = 1;
  BoundaryProfile prof;
  for (int k = 0; k < R; ++k) {
    if (removed[k])
      prof.removed_faces.push_back(ring_faces[k]);
    else
      ba[sg->black_of_face(ring_faces[k])] = 1;
  }
  // ring white between consecutive ring faces: find it by its two faces
  for (int w : ring_whites) {
    int a = G.left_face(w), b = G.right_face(w);
    bool ra = false, rb = false;
    for (int f : prof.removed_faces) {
      ra = ra || f == a;
      rb = rb || f == b;
    }
    if (ra && rb)
      prof.removed_whites.push_back(w);
    else
      wa[w] = 1;
  }
  Region r = make_region(std::move(sg), std::move(wa), std::move(ba), RegionKind::two_corner);
  prof.corner = r.profile.corner;
  prof.convex = r.profile.convex;
  prof.concave = r.profile.concave;
  prof.flat = r.profile.flat;
  prof.v1 = v1;
  prof.v2 = v2;
  r.profile = prof;
  if (!r.balanced())
    throw RegionError("two-corner region is unbalanced: " + std::to_string(r.whites.size()) + " whites, " +
                      std::to_string(r.blacks.size()) + " blacks");
  for (int w : r.whites)
    if (r.profile.corner[w] == Corner::concave) throw RegionError("two-corner region has a concave white corner", w);
  if (r.profile.convex != 2) {
    int offending = -1;
    for (int w : r.whites)
      if (r.profile.corner[w] == Corner::convex) offending = w;
    throw RegionError("two-corner region has " + std::to_string(r.profile.convex) + " convex corners", offending);
  }
  if (!has_perfect_matching(r)) throw RegionError("two-corner region admits no perfect matching");
  return r;
}

}  // namespace hypdimer
