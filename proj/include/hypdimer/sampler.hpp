#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "hypdimer/error.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/potential.hpp"
#include "hypdimer/temperley.hpp"

namespace hypdimer {

using Rng = std::mt19937_64;

// splitmix64 finaliser
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the named stream `name`/`index` under a user seed. Distinct names or
// indices give unrelated mt19937_64 states.
inline std::uint64_t stream_seed(std::uint64_t user_seed, std::string_view name, std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return mix64(mix64(user_seed) ^ mix64(h + 0x632be59bd9b4e019ULL * (index + 1)));
}

inline Rng make_rng(std::uint64_t user_seed, std::string_view name, std::uint64_t index = 0) {
  return Rng(stream_seed(user_seed, name, index));
}

// Uniform double in [0,1) built from the top 53 bits; unlike the std
// distributions this is identical across standard libraries.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Oriented spanning tree of a network: every node but the root points at its parent.
struct DirectedTree {
  int root = -1;
  std::vector<int> parent;       // node -> parent node, -1 at the root
  std::vector<int> parent_link;  // node -> link id toward the parent, -1 at the root

  int size() const { return static_cast<int>(parent.size()); }
  bool operator==(const DirectedTree&) const = default;

  // Link ids of the tree, sorted.
  std::vector<int> links() const {
    std::vector<int> out;
    for (int l : parent_link)
      if (l >= 0) out.push_back(l);
    std::sort(out.begin(), out.end());
    return out;
  }
};

// Checks that `t` is a spanning tree of `net` oriented toward its root.
inline bool is_spanning_tree(const Network& net, const DirectedTree& t) {
  if (t.size() != net.n || t.root < 0 || t.root >= net.n) return false;
  if (static_cast<int>(t.parent_link.size()) != net.n) return false;
  for (int u = 0; u < net.n; ++u) {
    if (u == t.root) {
      if (t.parent[u] != -1 || t.parent_link[u] != -1) return false;
      continue;
    }
    int l = t.parent_link[u];
    if (l < 0 || l >= static_cast<int>(net.links.size())) return false;
    const auto& L = net.links[l];
    if (!((L.tail == u && L.head == t.parent[u]) || (L.head == u && L.tail == t.parent[u]))) return false;
  }
  // 0 unknown, 1 on the current path, 2 reaches the root
  std::vector<char> state(net.n, 0);
  state[t.root] = 2;
  for (int s = 0; s < net.n; ++s) {
    std::vector<int> path;
    int u = s;
    while (state[u] == 0) {
      state[u] = 1;
      path.push_back(u);
      u = t.parent[u];
    }
    if (state[u] == 1) return false;
    for (int x : path) state[x] = 2;
  }
  return true;
}

// Loop-erased random walk sampler for weighted spanning trees rooted at `root`.
// Tables are built once so repeated draws only pay for the walks.
class UstSampler {
 public:
  UstSampler(const Network& net, int root) : n_(net.n), root_(root) {
    if (root < 0 || root >= net.n) throw Error("root out of range");
    for (double x : net.leak)
      if (x != 0.0) throw Error("wire the leak to an explicit node before sampling");
    start_.assign(n_ + 1, 0);
    for (const auto& l : net.links) {
      if (l.tail == l.head) continue;
      if (!(l.conductance > 0.0)) throw Error("conductances must be positive");
      ++start_[l.tail + 1];
      ++start_[l.head + 1];
    }
    for (int u = 0; u < n_; ++u) start_[u + 1] += start_[u];
    target_.resize(start_[n_]);
    link_.resize(start_[n_]);
    cumulative_.resize(start_[n_]);
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (int i = 0; i < static_cast<int>(net.links.size()); ++i) {
      const auto& l = net.links[i];
      if (l.tail == l.head) continue;
      for (auto [a, b] : {std::pair{l.tail, l.head}, {l.head, l.tail}}) {
        target_[fill[a]] = b;
        link_[fill[a]] = i;
        cumulative_[fill[a]] = l.conductance;
        ++fill[a];
      }
    }
    for (int u = 0; u < n_; ++u)
      for (int k = start_[u] + 1; k < start_[u + 1]; ++k) cumulative_[k] += cumulative_[k - 1];
    // connectivity to the root, else the walks never stop
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{root_};
    seen[root_] = 1;
    int reached = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int k = start_[u]; k < start_[u + 1]; ++k)
        if (!seen[target_[k]]) {
          seen[target_[k]] = 1;
          ++reached;
          stack.push_back(target_[k]);
        }
    }
    if (reached != n_) throw Error("network is disconnected");
  }

  int root() const { return root_; }

  DirectedTree sample(Rng& rng) const {
    DirectedTree t;
    t.root = root_;
    t.parent.assign(n_, -1);
    t.parent_link.assign(n_, -1);
    std::vector<char> in_tree(n_, 0);
    in_tree[root_] = 1;
    for (int s = 0; s < n_; ++s) {
      int u = s;
      while (!in_tree[u]) {
        int k = step(u, rng);
        t.parent[u] = target_[k];
        t.parent_link[u] = link_[k];
        u = target_[k];
      }
      // the last exit from each vertex is the loop-erased path
      for (u = s; !in_tree[u]; u = t.parent[u]) in_tree[u] = 1;
    }
    return t;
  }

 private:
  int step(int u, Rng& rng) const {
    const int lo = start_[u], hi = start_[u + 1];
    double x = uniform01(rng) * cumulative_[hi - 1];
    int k = static_cast<int>(std::upper_bound(cumulative_.begin() + lo, cumulative_.begin() + hi, x) - cumulative_.begin());
    return std::min(k, hi - 1);
  }

  int n_;
  int root_;
  std::vector<int> start_;
  std::vector<int> target_;
  std::vector<int> link_;
  std::vector<double> cumulative_;
};

inline DirectedTree wilson_ust(const Network& net, int root, std::uint64_t seed) {
  Rng rng(seed);
  return UstSampler(net, root).sample(rng);
}

// Perfect matching of a region, stored as the black matched to each local white.
struct Matching {
  const Region* region = nullptr;
  std::vector<int> black_of;

  bool operator==(const Matching& o) const { return black_of == o.black_of; }

  int black_of_white(int w) const { return black_of.at(region->white_index.at(w)); }

  std::vector<DimerEdge> edges() const {
    std::vector<DimerEdge> out;
    for (int i = 0; i < static_cast<int>(black_of.size()); ++i) out.push_back({region->whites[i], black_of[i]});
    return out;
  }

  // Sorted superposition edge ids.
  std::vector<int> edge_ids() const {
    std::vector<int> out;
    const auto& sg = *region->sg;
    for (int i = 0; i < static_cast<int>(black_of.size()); ++i)
      for (int id : sg.white_edges[region->whites[i]])
        if (sg.edges[id].black == black_of[i]) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
  }

  bool contains(int w, int b) const {
    int i = region->white_index[w];
    return i >= 0 && black_of[i] == b;
  }

  bool valid() const {
    if (!region || static_cast<int>(black_of.size()) != region->size() || !region->balanced()) return false;
    std::vector<char> used(region->black_active.size(), 0);
    for (int i = 0; i < region->size(); ++i) {
      int b = black_of[i];
      if (b < 0 || b >= static_cast<int>(used.size()) || !region->black_active[b] || used[b]) return false;
      if (!region->sg->adjacent(region->whites[i], b)) return false;
      used[b] = 1;
    }
    return true;
  }
};

struct TemperleyTrees {
  DirectedTree primal;
  DirectedTree dual;
};

// Bijection between spanning trees of the primal graph of a region (absent
// primal endpoints merged into one root) and its perfect matchings. The
// whites off the tree form a spanning tree of the dual graph, whose absent
// endpoints are merged into a second root. Each non-root black is matched to
// the white on its edge toward the root.
class TemperleyMap {
 public:
  explicit TemperleyMap(const Region& r) : region_(&r) {
    if (!r.balanced()) throw RegionError("region is unbalanced");
    const auto& sg = *r.sg;
    primal_node_.assign(sg.num_black(), -1);
    dual_node_.assign(sg.num_black(), -1);
    primal_ = make_network(0);
    dual_ = make_network(0);
    auto add = [](Network& net, int lab) {
      net.label.push_back(lab);
      net.leak.push_back(0.0);
      return net.n++;
    };
    for (int b : r.blacks) {
      if (sg.is_primal(b))
        primal_node_[b] = add(primal_, b);
      else
        dual_node_[b] = add(dual_, b);
    }
    primal_root_ = add(primal_, -1);
    dual_root_ = add(dual_, -1);
    primal_link_.assign(sg.num_white(), -1);
    dual_link_.assign(sg.num_white(), -1);
    for (int w : r.whites) {
      auto pe = sg.primal_ends(w);
      auto de = sg.dual_ends(w);
      int a = node_or_root(pe[0], primal_node_, primal_root_), b = node_or_root(pe[1], primal_node_, primal_root_);
      int c = node_or_root(de[0], dual_node_, dual_root_), d = node_or_root(de[1], dual_node_, dual_root_);
      double nu = sg.graph->nu[w], nu_dual = sg.graph->nu_dual[w];
      if (a != b) {
        primal_link_[w] = static_cast<int>(primal_.links.size());
        primal_.links.push_back({a, b, nu / nu_dual, w});
      }
      if (c != d) {
        dual_link_[w] = static_cast<int>(dual_.links.size());
        dual_.links.push_back({c, d, nu_dual / nu, w});
      }
    }
  }

  const Region& region() const { return *region_; }
  const Network& primal() const { return primal_; }
  const Network& dual() const { return dual_; }
  int primal_root() const { return primal_root_; }
  int dual_root() const { return dual_root_; }

  // Matching from a primal tree rooted at primal_root().
  Matching forward(const DirectedTree& t) const { return forward_with_dual(t).first; }

  std::pair<Matching, DirectedTree> forward_with_dual(const DirectedTree& t) const {
    if (t.root != primal_root_ || t.size() != primal_.n) throw Error("tree does not belong to this region");
    const Region& r = *region_;
    Matching m{region_, std::vector<int>(r.size(), -1)};
    std::vector<char> in_tree(r.sg->num_white(), 0);
    for (int u = 0; u < primal_.n; ++u) {
      if (u == primal_root_) continue;
      int l = t.parent_link[u];
      if (l < 0) throw Error("tree is missing a parent link");
      int w = primal_.links[l].label;
      if (in_tree[w]) throw Error("tree uses a link twice");
      in_tree[w] = 1;
      m.black_of[r.white_index[w]] = primal_.label[u];
    }
    // the complementary whites must span the dual graph as a tree
    auto adj = dual_.adjacency();
    DirectedTree d;
    d.root = dual_root_;
    d.parent.assign(dual_.n, -1);
    d.parent_link.assign(dual_.n, -1);
    std::vector<char> seen(dual_.n, 0);
    std::vector<int> queue{dual_root_};
    seen[dual_root_] = 1;
    int used = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      int u = queue[qi];
      for (auto [v, l] : adj[u]) {
        if (in_tree[dual_.links[l].label]) continue;
        if (seen[v]) {
          if (d.parent_link[u] != l) throw Error("complement of the tree contains a dual cycle");
          continue;
        }
        seen[v] = 1;
        d.parent[v] = u;
        d.parent_link[v] = l;
        queue.push_back(v);
        ++used;
      }
    }
    if (used != dual_.n - 1) throw Error("complement of the tree does not span the dual graph");
    for (int v = 0; v < dual_.n; ++v) {
      if (v == dual_root_) continue;
      int w = dual_.links[d.parent_link[v]].label;
      m.black_of[r.white_index[w]] = dual_.label[v];
    }
    for (int b : m.black_of)
      if (b < 0) throw Error("a white was left unmatched");
    return {std::move(m), std::move(d)};
  }

  TemperleyTrees inverse(const Matching& m) const {
    const Region& r = *region_;
    if (m.region != region_ && (m.region == nullptr || m.region->whites != r.whites))
      throw Error("matching belongs to another region");
    TemperleyTrees out{read_tree(m, primal_, primal_node_, primal_root_, primal_link_, true),
                       read_tree(m, dual_, dual_node_, dual_root_, dual_link_, false)};
    return out;
  }

 private:
  static int node_or_root(int b, const std::vector<int>& node, int root) {
    return b >= 0 && node[b] >= 0 ? node[b] : root;
  }

  DirectedTree read_tree(const Matching& m, const Network& net, const std::vector<int>& node, int root,
                         const std::vector<int>& link_of, bool primal) const {
    const Region& r = *region_;
    const auto& sg = *r.sg;
    std::vector<int> white_of(sg.num_black(), -1);
    for (int i = 0; i < r.size(); ++i) white_of[m.black_of[i]] = r.whites[i];
    DirectedTree t;
    t.root = root;
    t.parent.assign(net.n, -1);
    t.parent_link.assign(net.n, -1);
    for (int u = 0; u < net.n; ++u) {
      if (u == root) continue;
      int b = net.label[u];
      int w = white_of[b];
      int l = w < 0 ? -1 : link_of[w];
      if (l < 0) throw Error("matching is not of Temperley type at black " + std::to_string(b));
      auto ends = primal ? sg.primal_ends(w) : sg.dual_ends(w);
      int other = ends[0] == b ? ends[1] : ends[0];
      t.parent[u] = node_or_root(other, node, root);
      t.parent_link[u] = l;
    }
    if (!is_spanning_tree(net, t)) throw Error("matching is not of Temperley type: recovered graph has a cycle");
    return t;
  }

  const Region* region_;
  Network primal_;
  Network dual_;
  std::vector<int> primal_node_;
  std::vector<int> dual_node_;
  std::vector<int> primal_link_;
  std::vector<int> dual_link_;
  int primal_root_ = -1;
  int dual_root_ = -1;
};

// Repeated exact sampling of matchings with the ν-weighted dimer law.
class MatchingSampler {
 public:
  explicit MatchingSampler(const Region& r) : map_(r), ust_(map_.primal(), map_.primal_root()) {}
  const TemperleyMap& map() const { return map_; }
  Matching sample(Rng& rng) const { return map_.forward(ust_.sample(rng)); }

 private:
  TemperleyMap map_;
  UstSampler ust_;
};

inline Matching sample_matching(const Region& r, std::uint64_t seed) {
  Rng rng(seed);
  return MatchingSampler(r).sample(rng);
}

// Two independent matchings; equal seeds give the same matching twice.
inline std::pair<Matching, Matching> pair_sampler(const Region& r, std::uint64_t seed1, std::uint64_t seed2) {
  MatchingSampler s(r);
  Rng a(seed1), b(seed2);
  auto m1 = s.sample(a);
  auto m2 = s.sample(b);
  return {std::move(m1), std::move(m2)};
}

}  // namespace hypdimer
