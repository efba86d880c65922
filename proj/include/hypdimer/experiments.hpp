#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "hypdimer/heights.hpp"
#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/potential.hpp"

namespace hypdimer {

// Dirichlet Green values of the walk killed on leaving each step of an
// exhaustion of a {p,q} patch, at fixed parent-vertex pairs.
struct GreenExhaustion {
  std::vector<int> radii;
  std::vector<std::pair<int, int>> pairs;  // parent vertex ids
  std::vector<std::vector<double>> value;  // [step][pair]
  bool monotone = true;
  std::vector<double> final_gap;  // per pair, last step minus the one before
};

// The pairs default to (u,u) and (u,v) for the first two vertices of the root face.
inline GreenExhaustion green_exhaustion(const PlanarGraph& g, int ambient_degree, const std::vector<int>& schedule,
                                        std::vector<std::pair<int, int>> pairs = {}) {
  auto steps = exhaustion(g, schedule);
  if (pairs.empty()) {
    const auto& core = steps.front().vertices;
    if (core.size() < 2) throw GraphError("innermost exhaustion step has fewer than two vertices");
    pairs = {{core[0], core[0]}, {core[0], core[1]}};
  }
  GreenExhaustion out;
  out.radii = schedule;
  out.pairs = pairs;
  for (const auto& s : steps) {
    Network net = primal_network(s.patch.graph, ambient_degree);
    for (int u = 0; u < net.n; ++u) net.label[u] = s.patch.vertex_of[u];
    GreenTable table(laplacian(net, Flavor::dirichlet));
    std::vector<double> row;
    for (auto [u, v] : pairs) row.push_back(table.G(u, v));
    out.value.push_back(row);
  }
  for (std::size_t k = 1; k < out.value.size(); ++k)
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (out.value[k][i] < out.value[k - 1][i] - 1e-14) out.monotone = false;
  if (out.value.size() >= 2)
    for (std::size_t i = 0; i < pairs.size(); ++i)
      out.final_gap.push_back(out.value.back()[i] - out.value[out.value.size() - 2][i]);
  return out;
}

struct CorrelationRow {
  int separation = 0;  // half the superposition distance between the two whites
  int events = 0;
  DimerEdge worst{};   // edge attaining the largest covariance
  double max_covariance = 0.0;
  double mean_covariance = 0.0;
};

// |P(A1 ∩ A2) − P(A1)P(A2)| for A1 = {anchor ∈ M} and A2 = {e ∈ M}, grouped by
// separation. The joint probability is P(A1) P(A2 | A1) with the conditional
// taken from the matrix with the anchor's vertices deleted.
inline std::vector<CorrelationRow> correlation_scan(const Region& r, DimerEdge anchor) {
  const auto& sg = *r.sg;
  auto D = build_dirac(r);
  ConditionedDirac plain(D, {});
  ConditionedDirac given(D, {anchor});
  if (!plain.possible()) throw LinearAlgebraError("region has no perfect matching (Z = 0)");
  const double p1 = plain.probability({anchor});
  if (!given.possible() || p1 <= 0.0) throw Error("anchor edge has probability 0");
  const int W = sg.num_white();
  std::vector<int> dist(W + sg.num_black(), -1);
  std::vector<int> queue{anchor.white};
  dist[anchor.white] = 0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    int u = queue[i];
    if (u < W) {
      for (int b : r.neighbors(u))
        if (dist[W + b] < 0) {
          dist[W + b] = dist[u] + 1;
          queue.push_back(W + b);
        }
    } else {
      for (int id : sg.black_edges[u - W]) {
        int w = sg.edges[id].white;
        if (r.white_active[w] && dist[w] < 0) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
  }
  std::map<int, CorrelationRow> rows;
  for (int w : r.whites) {
    if (dist[w] <= 0) continue;
    for (int b : r.neighbors(w)) {
      if (b == anchor.black) continue;
      DimerEdge e{w, b};
      double cov = std::abs(p1 * given.probability({e}) - p1 * plain.probability({e}));
      auto& row = rows[dist[w] / 2];
      row.separation = dist[w] / 2;
      ++row.events;
      row.mean_covariance += cov;
      if (cov >= row.max_covariance) {
        row.max_covariance = cov;
        row.worst = e;
      }
    }
  }
  std::vector<CorrelationRow> out;
  for (auto& [d, row] : rows) {
    row.mean_covariance /= row.events;
    out.push_back(row);
  }
  return out;
}

// Anchor used by the experiments: the primal edge of the center quad.
inline DimerEdge center_anchor(const Region& r) {
  FaceGraph fg(r);
  const auto& Q = r.sg->quads[fg.center_quad()];
  return {Q.w1, Q.v};
}

}  // namespace hypdimer
