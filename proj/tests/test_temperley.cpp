#include <gtest/gtest.h>

#include "hypdimer/kasteleyn.hpp"
#include "hypdimer/temperley.hpp"
#include "oracles.hpp"

using namespace hypdimer;

namespace {

std::shared_ptr<const SuperpositionGraph> packed(const PlanarGraph& g, Geometry geo = Geometry::euclidean) {
  auto P = solve_double_packing(g, geo);
  return std::make_shared<const SuperpositionGraph>(superpose(g, P));
}

Geometry geometry_of(int p, int q) { return is_hyperbolic(p, q) ? Geometry::hyperbolic : Geometry::euclidean; }

// Vertices (i,j) with lo <= i,j <= hi of square_grid(n).
std::vector<int> grid_block(int n, int lo, int hi) {
  std::vector<int> out;
  for (int j = lo; j <= hi; ++j)
    for (int i = lo; i <= hi; ++i) out.push_back(j * (n + 1) + i);
  return out;
}

}  // namespace

TEST(Superposition, SingleSquareCounts) {
  auto g = square_grid(1);
  auto sg = packed(g);
  EXPECT_EQ(sg->num_white(), 4);
  EXPECT_EQ(sg->num_black(), 5);
  EXPECT_EQ(sg->quads.size(), 4u);
  int centre = sg->black_of_face(0);
  for (const auto& q : sg->quads) EXPECT_EQ(q.f, centre);
}

TEST(Superposition, CountsMatchGraph) {
  for (auto [p, q, d] : {std::tuple{3, 7, 2}, {4, 4, 2}, {6, 3, 1}, {4, 5, 1}}) {
    auto g = build_pq_tiling(p, q, d);
    auto sg = packed(g, geometry_of(p, q));
    EXPECT_EQ(sg->num_white(), g.num_edges());
    EXPECT_EQ(sg->num_black(), g.num_vertices + g.num_inner_faces());
    for (int w = 0; w < sg->num_white(); ++w) {
      EXPECT_LE(sg->white_edges[w].size(), 4u);
      bool interior = g.left_face(w) != g.outer_face && g.right_face(w) != g.outer_face;
      if (interior) {
        EXPECT_EQ(sg->white_edges[w].size(), 4u);
      }
    }
    for (const auto& e : sg->edges) EXPECT_LT(e.black, sg->num_black());
  }
}

TEST(Superposition, QuadsAreConcyclic) {
  // a right kite is inscribed in the circle on the diagonal joining its blacks
  for (auto [p, q, d] : {std::tuple{3, 7, 3}, {4, 4, 3}, {5, 4, 1}}) {
    auto sg = packed(build_pq_tiling(p, q, d), geometry_of(p, q));
    double worst = 0.0;
    for (const auto& Q : sg->quads) {
      Point c = 0.5 * (sg->black_pos[Q.v] + sg->black_pos[Q.f]);
      double rad = 0.5 * std::abs(sg->black_pos[Q.v] - sg->black_pos[Q.f]);
      for (int w : {Q.w1, Q.w2}) worst = std::max(worst, std::abs(std::abs(sg->white_pos[w] - c) - rad) / rad);
    }
    EXPECT_LT(worst, 1e-7) << p << "," << q;
  }
}

TEST(Superposition, QuadsAreCounterclockwise) {
  auto sg = packed(build_pq_tiling(3, 7, 2), Geometry::hyperbolic);
  for (const auto& Q : sg->quads) {
    Point a = sg->black_pos[Q.v], b = sg->white_pos[Q.w1], c = sg->black_pos[Q.f], d = sg->white_pos[Q.w2];
    double area = std::imag(std::conj(b - a) * (c - a)) + std::imag(std::conj(c - a) * (d - a));
    EXPECT_GT(area, 0.0);
  }
}

TEST(Superposition, RejectsUncertifiedPacking) {
  auto g = square_grid(2);
  auto P = solve_double_packing(g, Geometry::euclidean);
  P.vertex_radius[4] *= 1.01;
  EXPECT_THROW(superpose(g, P), PackingError);
}

TEST(Temperley, SingleSquareHasFourMatchings) {
  auto sg = packed(square_grid(1));
  auto r = temperley_trim(sg);
  EXPECT_EQ(r.whites.size(), 4u);
  EXPECT_EQ(r.blacks.size(), 4u);
  EXPECT_EQ(r.profile.b0, 3);
  EXPECT_EQ(oracle::matchings(r).size(), 4u);
  EXPECT_TRUE(has_perfect_matching(r));
}

TEST(Temperley, MatchingCountEqualsTreeCount) {
  std::vector<std::pair<PlanarGraph, Geometry>> cases;
  for (int n : {1, 2, 3}) cases.push_back({square_grid(n), Geometry::euclidean});
  for (auto [p, q] : {std::pair{3, 7}, {4, 5}, {5, 4}, {6, 3}, {7, 3}}) cases.push_back({build_pq_tiling(p, q, 0), geometry_of(p, q)});
  cases.push_back({build_pq_tiling(6, 3, 1), Geometry::euclidean});
  for (auto& [g, geo] : cases) {
    ASSERT_LE(g.num_inner_faces(), 10);
    auto r = temperley_trim(packed(g, geo));
    double trees = oracle::matrix_tree(oracle::from_planar(g));
    EXPECT_EQ(static_cast<double>(oracle::matchings(r).size()), std::round(trees)) << g.num_vertices;
  }
}

TEST(Temperley, EveryBoundaryRootBalances) {
  auto g = build_pq_tiling(3, 7, 1);
  auto sg = packed(g, Geometry::hyperbolic);
  auto boundary = g.boundary_flags();
  for (int v = 0; v < g.num_vertices; ++v) {
    if (boundary[v]) {
      auto r = temperley_trim(sg, v);
      EXPECT_TRUE(r.balanced());
      EXPECT_TRUE(has_perfect_matching(r));
    } else {
      EXPECT_THROW(temperley_trim(sg, v), RegionError);
    }
  }
}

TEST(Temperley, DefaultRootIsLargestBoundaryId) {
  auto g = square_grid(3);
  auto sg = packed(g);
  EXPECT_EQ(default_b0(*sg), 15);
  EXPECT_EQ(temperley_trim(sg).profile.b0, 15);
}

TEST(Corners, RectangleHasNoConcaveCorner) {
  for (int n : {1, 2, 4}) {
    auto r = temperley_trim(packed(square_grid(n)));
    EXPECT_EQ(r.profile.concave, 0);
    // the two edges at the removed corner each keep a single quad
    EXPECT_EQ(r.profile.convex, 2);
  }
}

TEST(Corners, LShapeHasConcaveCorner) {
  auto sg = packed(square_grid(2));
  // white of the interior edge from (1,0) to (1,1); keep three of its four quads
  int centre_white = -1;
  for (int w = 0; w < sg->num_white(); ++w)
    if (sg->quads_of_white[w].size() == 4) centre_white = w;
  ASSERT_GE(centre_white, 0);
  auto qs = sg->quads_of_white[centre_white];
  qs.pop_back();
  auto r = region_from_quads(sg, qs);
  // the centre white keeps both blacks of the dropped quad but loses its partner
  EXPECT_GE(r.profile.concave, 1);
  EXPECT_EQ(r.profile.corner[centre_white], Corner::concave);
}

TEST(Corners, InteriorWhitesUnlabelled) {
  auto g = square_grid(3);
  auto r = temperley_trim(packed(g));
  for (int w : r.whites) {
    bool inner = g.left_face(w) != g.outer_face && g.right_face(w) != g.outer_face;
    auto [a, b] = r.sg->primal_ends(w);
    if (inner && a != r.profile.b0 && b != r.profile.b0) {
      EXPECT_EQ(r.profile.corner[w], Corner::interior) << w;
    }
  }
}

TEST(TwoCorner, GridPatch) {
  const int n = 5;
  auto sg = packed(square_grid(n));
  auto patch = grid_block(n, 1, 4);
  int v1 = 1 * (n + 1) + 1, v2 = 1 * (n + 1) + 4;
  auto r = two_corner_region(sg, patch, v1, v2);
  EXPECT_EQ(r.profile.convex, 2);
  EXPECT_EQ(r.profile.concave, 0);
  EXPECT_TRUE(r.balanced());
  auto D = build_dirac(r);
  EXPECT_GT(partition_function(D), 0.0);
}

TEST(TwoCorner, VariousCornerChoices) {
  const int n = 6;
  auto sg = packed(square_grid(n));
  auto patch = grid_block(n, 1, 4);
  Subgraph sub = induced_subgraph(sg->base(), patch);
  std::vector<int> cycle;
  for (int v : sub.graph.boundary_cycle()) cycle.push_back(sub.vertex_of[v]);
  int built = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    for (std::size_t j = 0; j < cycle.size(); ++j) {
      if (i == j) continue;
      try {
        auto r = two_corner_region(sg, patch, cycle[i], cycle[j]);
        EXPECT_EQ(r.profile.convex, 2);
        EXPECT_EQ(r.profile.concave, 0);
        EXPECT_TRUE(has_perfect_matching(r));
        ++built;
      } catch (const RegionError&) {
      }
    }
  EXPECT_GT(built, 10);
}

TEST(TwoCorner, HexagonAndTriangleAmbients) {
  auto hex = build_pq_tiling(6, 3, 2);
  auto sg = packed(hex);
  std::vector<int> cell = hex.face_vertices(hex.root_face);
  Subgraph sub = induced_subgraph(hex, cell);
  std::vector<int> cyc;
  for (int v : sub.graph.boundary_cycle()) cyc.push_back(sub.vertex_of[v]);
  auto r = two_corner_region(sg, cell, cyc[0], cyc[2]);
  EXPECT_EQ(r.whites.size(), 11u);
  EXPECT_EQ(oracle::matchings(r).size() > 0, true);
  EXPECT_NEAR(partition_function(build_dirac(r)), oracle::weighted_matching_sum(r), 1e-9);

  auto tri = build_pq_tiling(3, 7, 2);
  auto hsg = packed(tri, Geometry::hyperbolic);
  auto pv = tri.face_vertices(tri.root_face);
  auto r2 = two_corner_region(hsg, pv, pv[0], pv[2]);
  EXPECT_EQ(r2.profile.convex, 2);
  EXPECT_EQ(r2.profile.concave, 0);
}

TEST(TwoCorner, Rejections) {
  const int n = 5;
  auto sg = packed(square_grid(n));
  auto patch = grid_block(n, 1, 4);
  int v = n + 2;
  EXPECT_THROW(two_corner_region(sg, patch, v, v), RegionError);
  // interior vertex of the patch
  EXPECT_THROW(two_corner_region(sg, patch, 2 * (n + 1) + 2, v), RegionError);
  // patch reaching the ambient boundary has no ring
  EXPECT_THROW(two_corner_region(sg, grid_block(n, 0, 3), 0, 3), RegionError);
}
