#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/hyperbolic.hpp"

namespace hypdimer {

// Planar map stored as half-edges. Half-edge h belongs to edge h / 2 and its
// twin is h ^ 1; half-edge 2e runs from the tail of e to its head. The face on
// the left of a half-edge is traced by `next`, so inner faces run
// counterclockwise and the outer face clockwise.
struct PlanarGraph {
  int num_vertices = 0;
  std::vector<int> origin;
  std::vector<int> next;
  std::vector<int> prev;
  std::vector<int> face;
  std::vector<std::vector<int>> rotation;  // outgoing half-edges, counterclockwise
  std::vector<std::vector<int>> faces;     // half-edges of each face in tracing order
  std::vector<double> nu;                  // ν(e)
  std::vector<double> nu_dual;             // ν(e⁺)
  int outer_face = -1;
  int root_face = 0;
  std::vector<Point> position;  // reference layout (may be empty)

  static int twin(int h) { return h ^ 1; }
  static int edge_of(int h) { return h >> 1; }
  int num_edges() const { return static_cast<int>(origin.size() / 2); }
  int num_half_edges() const { return static_cast<int>(origin.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_inner_faces() const { return num_faces() - (outer_face >= 0 ? 1 : 0); }
  int head(int h) const { return origin[h ^ 1]; }
  int tail_of_edge(int e) const { return origin[2 * e]; }
  int head_of_edge(int e) const { return origin[2 * e + 1]; }
  int left_face(int e) const { return face[2 * e]; }
  int right_face(int e) const { return face[2 * e + 1]; }
  int degree(int v) const { return static_cast<int>(rotation[v].size()); }
  // Neighbouring outgoing half-edges around origin(h).
  int ccw(int h) const { return prev[h] ^ 1; }
  int cw(int h) const { return next[h ^ 1]; }
  double conductance(int e) const { return nu[e] / nu_dual[e]; }
  bool is_inner_face(int f) const { return f != outer_face; }

  std::vector<int> face_vertices(int f) const {
    std::vector<int> out;
    out.reserve(faces[f].size());
    for (int h : faces[f]) out.push_back(origin[h]);
    return out;
  }

  std::vector<char> boundary_flags() const {
    std::vector<char> flag(num_vertices, 0);
    if (outer_face >= 0)
      for (int h : faces[outer_face]) flag[origin[h]] = 1;
    return flag;
  }

  // Vertices of the outer face in counterclockwise order around the patch.
  std::vector<int> boundary_cycle() const {
    std::vector<int> out;
    if (outer_face < 0) return out;
    for (int h : faces[outer_face]) out.push_back(origin[h]);
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::vector<std::vector<int>> inner_faces_at_vertex() const {
    std::vector<std::vector<int>> out(num_vertices);
    for (int v = 0; v < num_vertices; ++v)
      for (int h : rotation[v])
        if (face[h] != outer_face) out[v].push_back(face[h]);
    return out;
  }

  bool connected() const {
    if (num_vertices == 0) return false;
    std::vector<char> seen(num_vertices, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int h : rotation[v]) {
        int u = head(h);
        if (!seen[u]) {
          seen[u] = 1;
          ++count;
          stack.push_back(u);
        }
      }
    }
    return count == num_vertices;
  }

  int euler_characteristic() const { return num_vertices - num_edges() + num_faces(); }

  void validate() const {
    const int H = num_half_edges();
    if (H % 2 != 0) throw GraphError("odd number of half-edges");
    if (static_cast<int>(next.size()) != H || static_cast<int>(face.size()) != H)
      throw GraphError("half-edge arrays have inconsistent sizes");
    std::vector<int> hits(H, 0);
    for (int h = 0; h < H; ++h) {
      if (origin[h] < 0 || origin[h] >= num_vertices) throw GraphError("half-edge origin out of range");
      if (next[h] < 0 || next[h] >= H) throw GraphError("next pointer out of range");
      ++hits[next[h]];
      if (origin[next[h]] != head(h)) throw GraphError("next half-edge does not start at the head");
    }
    for (int h = 0; h < H; ++h)
      if (hits[h] != 1) throw GraphError("next is not a permutation of the half-edges");
    std::vector<int> seen(H, 0);
    for (int f = 0; f < num_faces(); ++f)
      for (int h : faces[f]) {
        if (face[h] != f) throw GraphError("face labels disagree with face tracing");
        ++seen[h];
      }
    for (int h = 0; h < H; ++h)
      if (seen[h] != 1) throw GraphError("face tracing does not partition the half-edges");
    if (static_cast<int>(nu.size()) != num_edges() || static_cast<int>(nu_dual.size()) != num_edges())
      throw GraphError("weight arrays do not match the edge count");
    for (int e = 0; e < num_edges(); ++e)
      if (!(nu[e] > 0.0) || !(nu_dual[e] > 0.0) || !std::isfinite(nu[e]) || !std::isfinite(nu_dual[e]))
        throw GraphError("edge weights must be finite and strictly positive (edge " + std::to_string(e) + ")");
    if (!connected()) throw GraphError("graph is not connected");
    if (euler_characteristic() != 2)
      throw GraphError("Euler relation fails: V - E + F = " + std::to_string(euler_characteristic()));
    if (outer_face >= num_faces()) throw GraphError("outer face id out of range");
  }
};

namespace detail {

inline void trace_faces(PlanarGraph& g, const std::vector<int>& seeds) {
  const int H = g.num_half_edges();
  g.face.assign(H, -1);
  g.faces.clear();
  auto trace = [&](int start) {
    if (g.face[start] >= 0) return;
    int f = g.num_faces();
    g.faces.emplace_back();
    int h = start;
    int guard = 0;
    do {
      if (g.face[h] >= 0) throw GraphError("face tracing revisits a half-edge");
      g.face[h] = f;
      g.faces.back().push_back(h);
      h = g.next[h];
      if (++guard > H) throw GraphError("face tracing does not close");
    } while (h != start);
  };
  for (int s : seeds) trace(s);
  for (int h = 0; h < H; ++h) trace(h);
}

}  // namespace detail

// Builds a map from its face permutation. Faces are numbered in the order of
// `seeds` first, then by smallest half-edge.
inline PlanarGraph planar_from_next(int n, std::vector<int> origin, std::vector<int> next, int outer_half_edge,
                                    const std::vector<int>& seeds = {}) {
  PlanarGraph g;
  g.num_vertices = n;
  g.origin = std::move(origin);
  g.next = std::move(next);
  const int H = g.num_half_edges();
  if (static_cast<int>(g.next.size()) != H || H % 2) throw GraphError("malformed half-edge arrays");
  g.prev.assign(H, -1);
  for (int h = 0; h < H; ++h) {
    if (g.next[h] < 0 || g.next[h] >= H) throw GraphError("next pointer out of range");
    if (g.prev[g.next[h]] >= 0) throw GraphError("next is not a permutation");
    g.prev[g.next[h]] = h;
  }
  detail::trace_faces(g, seeds);
  g.rotation.assign(n, {});
  std::vector<char> placed(H, 0);
  for (int h = 0; h < H; ++h) {
    if (placed[h]) continue;
    int v = g.origin[h];
    if (!g.rotation[v].empty()) throw GraphError("rotation at vertex " + std::to_string(v) + " is not a single cycle");
    int x = h;
    do {
      if (g.origin[x] != v) throw GraphError("rotation leaves its vertex");
      placed[x] = 1;
      g.rotation[v].push_back(x);
      x = g.ccw(x);
    } while (x != h);
  }
  g.nu.assign(H / 2, 1.0);
  g.nu_dual.assign(H / 2, 1.0);
  g.outer_face = outer_half_edge >= 0 ? g.face[outer_half_edge] : -1;
  return g;
}

// Builds a map from counterclockwise rotations; edge e runs edges[e].first -> edges[e].second.
inline PlanarGraph planar_from_rotation(int n, const std::vector<std::pair<int, int>>& edges,
                                        const std::vector<std::vector<int>>& rotation, int outer_half_edge,
                                        const std::vector<int>& seeds = {}) {
  const int H = 2 * static_cast<int>(edges.size());
  std::vector<int> origin(H);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    origin[2 * e] = edges[e].first;
    origin[2 * e + 1] = edges[e].second;
  }
  std::vector<int> vertex_of(H, -1), slot(H, -1);
  for (int v = 0; v < n; ++v)
    for (int i = 0; i < static_cast<int>(rotation[v].size()); ++i) {
      int h = rotation[v][i];
      if (h < 0 || h >= H || origin[h] != v || vertex_of[h] >= 0)
        throw GraphError("rotation entry inconsistent at vertex " + std::to_string(v));
      vertex_of[h] = v;
      slot[h] = i;
    }
  for (int h = 0; h < H; ++h)
    if (vertex_of[h] < 0) throw GraphError("half-edge missing from rotation");
  std::vector<int> next(H);
  for (int h = 0; h < H; ++h) {
    int t = h ^ 1;
    const auto& rot = rotation[origin[t]];
    int k = static_cast<int>(rot.size());
    next[h] = rot[(slot[t] - 1 + k) % k];
  }
  return planar_from_next(n, std::move(origin), std::move(next), outer_half_edge, seeds);
}

// Builds a disk-like patch from its inner faces, each a counterclockwise vertex
// cycle. Inner face i keeps id i; the outer face gets the last id.
inline PlanarGraph planar_from_faces(int n, const std::vector<std::vector<int>>& face_cycles) {
  std::map<std::pair<int, int>, int> half_of;
  std::vector<std::pair<int, int>> edges;
  std::vector<char> used;
  std::vector<int> seeds;
  std::vector<int> succ;  // counterclockwise successor of an outgoing half-edge
  auto half_edge = [&](int a, int b) {
    auto it = half_of.find({a, b});
    if (it != half_of.end()) return it->second;
    int e = static_cast<int>(edges.size());
    edges.emplace_back(a, b);
    half_of[{a, b}] = 2 * e;
    half_of[{b, a}] = 2 * e + 1;
    used.push_back(0);
    used.push_back(0);
    succ.push_back(-1);
    succ.push_back(-1);
    return 2 * e;
  };
  for (const auto& cyc : face_cycles) {
    const int k = static_cast<int>(cyc.size());
    if (k < 3) throw GraphError("faces need at least three vertices");
    std::vector<int> hs(k);
    for (int i = 0; i < k; ++i) {
      int a = cyc[i], b = cyc[(i + 1) % k];
      if (a == b || a < 0 || b < 0 || a >= n || b >= n) throw GraphError("invalid face cycle");
      int h = half_edge(a, b);
      if (used[h]) throw GraphError("directed edge used by two faces (inconsistent orientation)");
      used[h] = 1;
      hs[i] = h;
    }
    seeds.push_back(hs[0]);
    for (int i = 0; i < k; ++i) {
      int in = hs[i], out = hs[(i + 1) % k];
      succ[out] = in ^ 1;
    }
  }
  const int H = static_cast<int>(used.size());
  std::vector<int> origin(H);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    origin[2 * e] = edges[e].first;
    origin[2 * e + 1] = edges[e].second;
  }
  std::vector<std::vector<int>> out_at(n);
  for (int h = 0; h < H; ++h) out_at[origin[h]].push_back(h);
  int outer_half_edge = -1;
  for (int v = 0; v < n; ++v) {
    if (out_at[v].empty()) throw GraphError("vertex " + std::to_string(v) + " lies on no face");
    std::vector<int> open;
    std::vector<char> targeted(H, 0);
    for (int h : out_at[v])
      if (succ[h] >= 0) targeted[succ[h]] = 1;
    for (int h : out_at[v])
      if (succ[h] < 0) open.push_back(h);
    if (open.size() > 1) throw GraphError("boundary is pinched at vertex " + std::to_string(v));
    if (open.size() == 1) {
      int start = -1;
      for (int h : out_at[v])
        if (!targeted[h]) start = h;
      if (start < 0) throw GraphError("rotation cannot be closed at vertex " + std::to_string(v));
      succ[open[0]] = start;
      outer_half_edge = open[0];
    }
  }
  std::vector<std::vector<int>> rotation(n);
  for (int v = 0; v < n; ++v) {
    int h = *std::min_element(out_at[v].begin(), out_at[v].end());
    int x = h;
    do {
      rotation[v].push_back(x);
      x = succ[x];
      if (static_cast<int>(rotation[v].size()) > static_cast<int>(out_at[v].size()))
        throw GraphError("rotation at vertex " + std::to_string(v) + " is not a single cycle");
    } while (x != h);
    if (rotation[v].size() != out_at[v].size())
      throw GraphError("rotation at vertex " + std::to_string(v) + " is not a single cycle");
  }
  PlanarGraph g = planar_from_rotation(n, edges, rotation, outer_half_edge, seeds);
  if (g.num_faces() != static_cast<int>(face_cycles.size()) + 1)
    throw GraphError("face list does not describe a disk");
  return g;
}

// Dual map. Dual vertex ids are the face ids of g and dual face v surrounds vertex
// v of g; dual half-edge k crosses half-edge k of g from its right to its left.
// The outer face of g becomes the ordinary dual vertex g.outer_face.
inline PlanarGraph dual_graph(const PlanarGraph& g) {
  const int H = g.num_half_edges();
  std::vector<int> origin(H), next(H);
  for (int k = 0; k < H; ++k) {
    origin[k] = g.face[k ^ 1];
    next[k] = g.prev[k] ^ 1;
  }
  std::vector<int> seeds;
  for (int v = 0; v < g.num_vertices; ++v) seeds.push_back(g.rotation[v].front());
  PlanarGraph d = planar_from_next(g.num_faces(), std::move(origin), std::move(next), -1, seeds);
  d.nu = g.nu_dual;
  d.nu_dual = g.nu;
  d.root_face = 0;
  return d;
}

// Orientation-preserving isomorphism test of two rotation systems.
inline bool isomorphic(const PlanarGraph& a, const PlanarGraph& b) {
  if (a.num_vertices != b.num_vertices || a.num_half_edges() != b.num_half_edges() ||
      a.num_faces() != b.num_faces())
    return false;
  const int H = a.num_half_edges();
  if (H == 0) return true;
  for (int start = 0; start < H; ++start) {
    std::vector<int> map(H, -1), vmap(a.num_vertices, -1), vinv(b.num_vertices, -1);
    std::vector<int> stack{0};
    map[0] = start;
    bool ok = true;
    while (ok && !stack.empty()) {
      int h = stack.back();
      stack.pop_back();
      int x = map[h];
      int va = a.origin[h], vb = b.origin[x];
      if (vmap[va] < 0 && vinv[vb] < 0) {
        vmap[va] = vb;
        vinv[vb] = va;
      } else if (vmap[va] != vb || vinv[vb] != va) {
        ok = false;
        break;
      }
      const std::pair<int, int> links[2] = {{a.next[h], b.next[x]}, {h ^ 1, x ^ 1}};
      for (auto [ha, hb] : links) {
        if (map[ha] < 0) {
          map[ha] = hb;
          stack.push_back(ha);
        } else if (map[ha] != hb) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return true;
  }
  return false;
}

struct Subgraph {
  PlanarGraph graph;
  std::vector<int> vertex_of;     // local vertex -> parent vertex
  std::vector<int> local_vertex;  // parent vertex -> local vertex or -1
  std::vector<int> edge_of;       // local edge -> parent edge
  std::vector<int> face_of;       // local face -> parent face (-1 if merged)
};

// Induced subgraph with the inherited rotation system. Throws unless the result
// is connected with a single non-original face (the outer one).
inline Subgraph induced_subgraph(const PlanarGraph& g, std::vector<int> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  Subgraph s;
  s.vertex_of = vertices;
  s.local_vertex.assign(g.num_vertices, -1);
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) s.local_vertex[vertices[i]] = i;
  std::vector<int> local_edge(g.num_edges(), -1);
  std::vector<std::pair<int, int>> edges;
  for (int e = 0; e < g.num_edges(); ++e) {
    int a = s.local_vertex[g.tail_of_edge(e)], b = s.local_vertex[g.head_of_edge(e)];
    if (a >= 0 && b >= 0) {
      local_edge[e] = static_cast<int>(edges.size());
      edges.emplace_back(a, b);
      s.edge_of.push_back(e);
    }
  }
  if (edges.empty()) throw GraphError("induced subgraph has no edges");
  const int n = static_cast<int>(vertices.size());
  std::vector<std::vector<int>> rotation(n);
  for (int i = 0; i < n; ++i)
    for (int h : g.rotation[vertices[i]]) {
      int le = local_edge[h >> 1];
      if (le >= 0) rotation[i].push_back(2 * le + (h & 1));
    }
  PlanarGraph sub = planar_from_rotation(n, edges, rotation, -1);
  if (!sub.connected()) throw GraphError("induced subgraph is disconnected");
  s.face_of.assign(sub.num_faces(), -1);
  int outer = -1, unmatched = 0;
  for (int f = 0; f < sub.num_faces(); ++f) {
    int parent = -1;
    bool same = true;
    for (int h : sub.faces[f]) {
      int ph = 2 * s.edge_of[h >> 1] + (h & 1);
      int pn = 2 * s.edge_of[sub.next[h] >> 1] + (sub.next[h] & 1);
      if (g.next[ph] != pn) same = false;
      parent = g.face[ph];
    }
    if (same && static_cast<int>(sub.faces[f].size()) == static_cast<int>(g.faces[parent].size()))
      s.face_of[f] = parent;
    if (s.face_of[f] < 0) {
      ++unmatched;
      outer = f;
    }
  }
  if (unmatched == 0) {
    for (int f = 0; f < sub.num_faces(); ++f)
      if (s.face_of[f] == g.outer_face) outer = f;
  } else if (unmatched > 1) {
    throw GraphError("induced subgraph is not simply connected");
  }
  sub.outer_face = outer;
  if (outer >= 0 && s.face_of[outer] >= 0 && s.face_of[outer] != g.outer_face)
    throw GraphError("induced subgraph has no outer face");
  for (int e = 0; e < sub.num_edges(); ++e) {
    sub.nu[e] = g.nu[s.edge_of[e]];
    sub.nu_dual[e] = g.nu_dual[s.edge_of[e]];
  }
  sub.root_face = outer == 0 && sub.num_faces() > 1 ? 1 : 0;
  for (int f = 0; f < sub.num_faces(); ++f)
    if (s.face_of[f] == g.root_face && f != outer) sub.root_face = f;
  if (!g.position.empty())
    for (int v : vertices) sub.position.push_back(g.position[v]);
  sub.validate();
  s.graph = std::move(sub);
  return s;
}

enum class ExhaustionRule { face_layers, vertex_balls };

struct ExhaustionStep {
  int radius = 0;
  std::vector<int> vertices;  // sorted parent ids
  std::vector<int> added;     // vertices new at this step
  std::vector<int> boundary;  // parent ids of the patch boundary cycle
  Subgraph patch;
  std::optional<int> contracted_vertex;
};

namespace detail {

// Adds every vertex cut off from the outer boundary of g by `in`.
inline void fill_holes(const PlanarGraph& g, std::vector<char>& in) {
  auto outer = g.boundary_flags();
  std::vector<int> comp(g.num_vertices, -1);
  for (int s = 0; s < g.num_vertices; ++s) {
    if (in[s] || comp[s] >= 0) continue;
    std::vector<int> members{s}, stack{s};
    comp[s] = s;
    bool reaches_outside = outer[s];
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int h : g.rotation[v]) {
        int u = g.head(h);
        if (in[u] || comp[u] >= 0) continue;
        comp[u] = s;
        reaches_outside = reaches_outside || outer[u];
        members.push_back(u);
        stack.push_back(u);
      }
    }
    if (!reaches_outside)
      for (int v : members) in[v] = 1;
  }
}

// The faces not covered by the patch, joined across edges missing from the
// patch, must form one connected region.
inline bool complement_connected(const PlanarGraph& g, const std::vector<char>& in) {
  const int F = g.num_faces();
  std::vector<char> covered(F, 0);
  for (int f = 0; f < F; ++f) {
    if (f == g.outer_face) continue;
    bool all = true;
    for (int h : g.faces[f]) all = all && in[g.origin[h]];
    covered[f] = all;
  }
  int start = g.outer_face >= 0 ? g.outer_face : -1;
  if (start < 0)
    for (int f = 0; f < F && start < 0; ++f)
      if (!covered[f]) start = f;
  if (start < 0) return true;
  std::vector<char> seen(F, 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    for (int h : g.faces[f]) {
      int e = h >> 1;
      if (in[g.tail_of_edge(e)] && in[g.head_of_edge(e)]) continue;
      int other = g.face[h ^ 1];
      if (!covered[other] && !seen[other]) {
        seen[other] = 1;
        stack.push_back(other);
      }
    }
  }
  for (int f = 0; f < F; ++f)
    if (!covered[f] && !seen[f]) return false;
  return true;
}

}  // namespace detail

// Vertex set of the patch grown `radius` layers around the root face.
inline std::vector<char> grow_patch(const PlanarGraph& g, int radius, ExhaustionRule rule, int root_face) {
  std::vector<char> in(g.num_vertices, 0);
  for (int v : g.face_vertices(root_face)) in[v] = 1;
  if (rule == ExhaustionRule::face_layers) {
    auto faces_at = g.inner_faces_at_vertex();
    for (int layer = 0; layer < radius; ++layer) {
      std::vector<char> grown = in;
      for (int v = 0; v < g.num_vertices; ++v) {
        if (!in[v]) continue;
        for (int f : faces_at[v])
          for (int u : g.face_vertices(f)) grown[u] = 1;
      }
      in.swap(grown);
    }
  } else {
    for (int layer = 0; layer < radius; ++layer) {
      std::vector<char> grown = in;
      for (int v = 0; v < g.num_vertices; ++v)
        if (in[v])
          for (int h : g.rotation[v]) grown[g.head(h)] = 1;
      in.swap(grown);
    }
  }
  detail::fill_holes(g, in);
  return in;
}

inline std::vector<ExhaustionStep> exhaustion(const PlanarGraph& g, const std::vector<int>& schedule,
                                              ExhaustionRule rule = ExhaustionRule::face_layers,
                                              std::optional<int> root_face = std::nullopt) {
  const int root = root_face.value_or(g.root_face);
  if (root < 0 || root >= g.num_faces() || root == g.outer_face) throw GraphError("invalid root face");
  std::vector<ExhaustionStep> steps;
  std::vector<char> previous(g.num_vertices, 0);
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 0 || (i > 0 && schedule[i] <= schedule[i - 1]))
      throw GraphError("exhaustion radii must be non-negative and increasing");
    auto in = grow_patch(g, schedule[i], rule, root);
    if (!detail::complement_connected(g, in)) throw GraphError("exhaustion step is not simply connected");
    ExhaustionStep step;
    step.radius = schedule[i];
    for (int v = 0; v < g.num_vertices; ++v)
      if (in[v]) {
        step.vertices.push_back(v);
        if (!previous[v]) step.added.push_back(v);
      }
    step.patch = induced_subgraph(g, step.vertices);
    for (int v : step.patch.graph.boundary_cycle()) step.boundary.push_back(step.patch.vertex_of[v]);
    previous = in;
    steps.push_back(std::move(step));
  }
  return steps;
}

struct Contraction {
  PlanarGraph graph;
  int contracted = -1;            // id of the vertex replacing S
  std::vector<int> vertex_map;    // parent vertex -> new vertex
  std::vector<int> edge_of;       // new edge -> parent edge
  std::vector<int> local_edge;    // parent edge -> new edge, -1 if deleted
};

// Identifies the vertices of S with one new vertex (the last id), deleting edges
// inside S. Members of S are merged along edges, or across a shared face, so
// the rotation system stays planar.
inline Contraction contract_vertices(const PlanarGraph& g, std::vector<int> S) {
  std::sort(S.begin(), S.end());
  S.erase(std::unique(S.begin(), S.end()), S.end());
  if (S.empty()) throw GraphError("contraction set is empty");
  if (static_cast<int>(S.size()) >= g.num_vertices) throw GraphError("cannot contract every vertex");
  for (int v : S)
    if (v < 0 || v >= g.num_vertices) throw GraphError("contraction vertex out of range");
  const int H = g.num_half_edges();
  std::vector<int> origin = g.origin;
  std::vector<std::vector<int>> rot = g.rotation;
  std::vector<char> dead_edge(g.num_edges(), 0), in_s(g.num_vertices, 0);
  for (int v : S) in_s[v] = 1;
  const int rep = S.front();
  std::vector<int> pending(S.begin() + 1, S.end());

  auto pos_in = [&](int v, int h) {
    auto it = std::find(rot[v].begin(), rot[v].end(), h);
    return static_cast<int>(it - rot[v].begin());
  };
  // Cyclic list of rot[v] starting just after slot i and ending at slot i.
  auto after = [&](int v, int i) {
    std::vector<int> out;
    int k = static_cast<int>(rot[v].size());
    for (int j = 1; j <= k; ++j) out.push_back(rot[v][(i + j) % k]);
    return out;
  };
  auto merge = [&](int s, std::vector<int> a, std::vector<int> b) {
    for (int h : b) origin[h] = rep;
    a.insert(a.end(), b.begin(), b.end());
    rot[rep] = std::move(a);
    rot[s].clear();
  };
  auto next_of = [&](int h) {
    int t = h ^ 1;
    int v = origin[t];
    int k = static_cast<int>(rot[v].size());
    int i = pos_in(v, t);
    return rot[v][(i - 1 + k) % k];
  };

  while (!pending.empty()) {
    bool progressed = false;
    for (std::size_t idx = 0; idx < pending.size() && !progressed; ++idx) {
      int s = pending[idx];
      // along an edge
      for (int h : rot[rep]) {
        if (origin[h ^ 1] != s) continue;
        int i = pos_in(rep, h), j = pos_in(s, h ^ 1);
        auto a = after(rep, i);
        a.pop_back();
        auto b = after(s, j);
        b.pop_back();
        dead_edge[h >> 1] = 1;
        merge(s, std::move(a), std::move(b));
        progressed = true;
        break;
      }
      if (progressed) {
        pending.erase(pending.begin() + static_cast<long>(idx));
        break;
      }
      // across a face: walk each face at rep looking for s
      for (int h : rot[rep]) {
        int x = h;
        int guard = 0;
        int hit = -1;
        do {
          if (origin[x] == s) {
            hit = x;
            break;
          }
          x = next_of(x);
        } while (x != h && ++guard <= H);
        if (hit < 0) continue;
        int i = pos_in(rep, h), j = pos_in(s, hit);
        merge(s, after(rep, i), after(s, j));
        progressed = true;
        break;
      }
      if (progressed) pending.erase(pending.begin() + static_cast<long>(idx));
    }
    if (!progressed) throw GraphError("contraction set cannot be merged without breaking planarity");
  }
  // delete loops created at the merged vertex
  std::vector<int> kept;
  for (int h : rot[rep]) {
    if (origin[h ^ 1] == rep) {
      dead_edge[h >> 1] = 1;
      continue;
    }
    if (!dead_edge[h >> 1]) kept.push_back(h);
  }
  rot[rep] = kept;
  for (int v = 0; v < g.num_vertices; ++v) {
    if (in_s[v]) continue;
    std::vector<int> r;
    for (int h : rot[v])
      if (!dead_edge[h >> 1]) r.push_back(h);
    rot[v] = r;
  }

  Contraction c;
  c.vertex_map.assign(g.num_vertices, -1);
  int n = 0;
  for (int v = 0; v < g.num_vertices; ++v)
    if (!in_s[v]) c.vertex_map[v] = n++;
  c.contracted = n++;
  for (int v : S) c.vertex_map[v] = c.contracted;
  c.local_edge.assign(g.num_edges(), -1);
  std::vector<std::pair<int, int>> edges;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (dead_edge[e]) continue;
    c.local_edge[e] = static_cast<int>(edges.size());
    c.edge_of.push_back(e);
    edges.emplace_back(c.vertex_map[g.tail_of_edge(e)], c.vertex_map[g.head_of_edge(e)]);
  }
  std::vector<std::vector<int>> rotation(n);
  for (int v = 0; v < g.num_vertices; ++v) {
    if (in_s[v] && v != rep) continue;
    int nv = c.vertex_map[v];
    for (int h : rot[v]) rotation[nv].push_back(2 * c.local_edge[h >> 1] + (h & 1));
  }
  int outer_half_edge = -1;
  if (g.outer_face >= 0)
    for (int h : g.faces[g.outer_face])
      if (!dead_edge[h >> 1]) {
        outer_half_edge = 2 * c.local_edge[h >> 1] + (h & 1);
        break;
      }
  c.graph = planar_from_rotation(n, edges, rotation, outer_half_edge);
  for (int e = 0; e < c.graph.num_edges(); ++e) {
    c.graph.nu[e] = g.nu[c.edge_of[e]];
    c.graph.nu_dual[e] = g.nu_dual[c.edge_of[e]];
  }
  c.graph.validate();
  return c;
}

// Wired version of an exhaustion step: everything outside the patch becomes one vertex.
inline Contraction wire_step(const PlanarGraph& g, ExhaustionStep& step) {
  std::vector<char> in(g.num_vertices, 0);
  for (int v : step.vertices) in[v] = 1;
  std::vector<int> outside;
  for (int v = 0; v < g.num_vertices; ++v)
    if (!in[v]) outside.push_back(v);
  if (outside.empty()) throw GraphError("patch already covers the whole graph");
  Contraction c = contract_vertices(g, outside);
  step.contracted_vertex = c.contracted;
  return c;
}

namespace detail {

// Spatial hash over points for duplicate detection during tiling growth.
class PointIndex {
 public:
  explicit PointIndex(double cell) : cell_(cell) {}

  template <class Near>
  int find(const std::vector<Point>& pts, Point z, Near near) const {
    auto [ix, iy] = key(z);
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = buckets_.find({ix + dx, iy + dy});
        if (it == buckets_.end()) continue;
        for (int id : it->second)
          if (near(pts[id], z)) return id;
      }
    return -1;
  }

  void insert(Point z, int id) { buckets_[key(z)].push_back(id); }

 private:
  std::pair<long long, long long> key(Point z) const {
    return {static_cast<long long>(std::floor(z.real() / cell_)), static_cast<long long>(std::floor(z.imag() / cell_))};
  }
  double cell_;
  std::map<std::pair<long long, long long>, std::vector<int>> buckets_;
};

}  // namespace detail

inline bool is_hyperbolic(int p, int q) { return 2 * (p + q) < p * q; }

// Patch of the regular tiling by p-gons, q around each vertex. Depth 0 is one
// p-gon; each further layer adds every face touching the previous patch. Vertex
// positions are tiling coordinates (Poincaré disk when hyperbolic). Every face
// is stored as an isometry image of the central polygon, so coordinates come
// from one product of half-turns instead of a chain of reflections.
inline PlanarGraph build_pq_tiling(int p, int q, int depth) {
  if (p < 3 || q < 3) throw GraphError("p and q must be at least 3");
  if (2 * (p + q) > p * q) throw GraphError("1/p + 1/q > 1/2 describes a spherical tiling");
  if (depth < 0) throw GraphError("depth must be non-negative");
  const double pi = std::numbers::pi;
  const bool hyp = is_hyperbolic(p, q);
  const double circumradius =
      hyp ? std::tanh(0.5 * std::acosh(1.0 / (std::tan(pi / p) * std::tan(pi / q)))) : 1.0 / (2.0 * std::sin(pi / p));
  std::vector<Point> corner(p);
  for (int k = 0; k < p; ++k) corner[k] = circumradius * std::polar(1.0, 2.0 * pi * k / p + pi / p - pi / 2);
  // half-turn about the midpoint of central edge k swaps its ends
  std::vector<Mobius> flip(p);
  for (int k = 0; k < p; ++k) {
    Point a = corner[k], b = corner[(k + 1) % p];
    flip[k] = hyp ? disk::half_turn(disk::midpoint(a, b)) : plane::half_turn(0.5 * (a + b));
  }

  std::vector<Point> pts;
  std::vector<std::vector<int>> polys;
  std::vector<Mobius> placement;
  std::vector<std::vector<int>> faces_at;
  std::map<std::vector<int>, int> face_id;
  detail::PointIndex index(hyp ? 1e-6 : 1e-3);
  auto near = [hyp](Point a, Point b) { return hyp ? disk::distance(a, b) < 1e-6 : std::abs(a - b) < 1e-6; };

  auto vertex = [&](Point z) {
    int id = index.find(pts, z, near);
    if (id >= 0) return id;
    id = static_cast<int>(pts.size());
    pts.push_back(z);
    faces_at.emplace_back();
    index.insert(z, id);
    return id;
  };
  auto add_face = [&](const Mobius& m) {
    std::vector<int> poly(p);
    for (int i = 0; i < p; ++i) poly[i] = vertex(m(corner[i]));
    std::vector<int> key = poly;
    std::sort(key.begin(), key.end());
    auto it = face_id.find(key);
    if (it != face_id.end()) return it->second;
    int f = static_cast<int>(polys.size());
    face_id[key] = f;
    for (int v : poly) faces_at[v].push_back(f);
    polys.push_back(std::move(poly));
    placement.push_back(m);
    return f;
  };

  add_face(Mobius{});
  for (int layer = 0; layer < depth; ++layer) {
    const int snapshot = static_cast<int>(pts.size());
    for (int v = 0; v < snapshot; ++v) {
      int f = faces_at[v].front();
      for (int step = 0; step < q; ++step) {
        const auto& poly = polys[f];
        int k = static_cast<int>(std::find(poly.begin(), poly.end(), v) - poly.begin());
        f = add_face(placement[f] * flip[k]);
      }
      if (static_cast<int>(faces_at[v].size()) != q)
        throw GraphError("tiling growth produced an inconsistent star at vertex " + std::to_string(v));
    }
  }
  PlanarGraph g = planar_from_faces(static_cast<int>(pts.size()), polys);
  g.position = pts;
  g.root_face = 0;
  g.validate();
  return g;
}

// n x n block of unit squares. Vertex (i, j) has id j * (n + 1) + i and cell
// (i, j) has face id j * n + i; the root face is the central cell.
inline PlanarGraph square_grid(int n) {
  if (n < 1) throw GraphError("grid size must be positive");
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::vector<int>> cells;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  PlanarGraph g = planar_from_faces((n + 1) * (n + 1), cells);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) g.position.emplace_back(i, j);
  const int c = (n - 1) / 2;
  g.root_face = c * n + c;
  g.validate();
  return g;
}

}  // namespace hypdimer
