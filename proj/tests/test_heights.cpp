#include <gtest/gtest.h>

#include "hypdimer/heights.hpp"
#include "oracles.hpp"

using namespace hypdimer;

namespace {

Region grid_region(int n) { return temperley_trim(fixtures::packed(square_grid(n), Geometry::euclidean)); }

Region hyperbolic_region(int depth) {
  return temperley_trim(fixtures::packed(build_pq_tiling(3, 7, depth), Geometry::hyperbolic));
}

int white_between(const PlanarGraph& g, int u, int v) {
  for (int h : g.rotation[u])
    if (g.head(h) == v) return h >> 1;
  return -1;
}

// Closed Ḡ polygon along the boundary of the vertex box [lo, hi]² of square_grid(n).
LoopComponent box_loop(const SuperpositionGraph& sg, int n, int lo, int hi) {
  std::vector<int> ring;
  for (int i = lo; i < hi; ++i) ring.push_back(lo * (n + 1) + i);
  for (int j = lo; j < hi; ++j) ring.push_back(j * (n + 1) + hi);
  for (int i = hi; i > lo; --i) ring.push_back(hi * (n + 1) + i);
  for (int j = hi; j > lo; --j) ring.push_back(j * (n + 1) + lo);
  LoopComponent c;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    int u = ring[k], v = ring[(k + 1) % ring.size()];
    int w = white_between(sg.base(), u, v);
    c.blacks.push_back(u);
    c.whites.push_back(w);
    c.polygon.push_back(sg.black_pos[u]);
    c.polygon.push_back(sg.white_pos[w]);
  }
  c.orientation = 1;
  c.height_sign = -1;
  return c;
}

// Number of loops enclosing exactly one of the two quads.
int separating_loops(const CycleDecomposition& d, int q1, int q2) {
  const auto& sg = *d.region->sg;
  Point a = quad_centroid(sg, q1), b = quad_centroid(sg, q2);
  int n = 0;
  for (const auto& c : d.components) n += polygon_contains(c.polygon, a) != polygon_contains(c.polygon, b);
  return n;
}

}  // namespace

TEST(AngleFlow, SquareGridQuarters) {
  auto sg = fixtures::packed(square_grid(4), Geometry::euclidean);
  auto a = angle_flow(*sg);
  for (std::size_t i = 0; i < a.theta.size(); ++i)
    if (a.complete[i]) {
      EXPECT_NEAR(a.theta[i], 0.25, 1e-12);
    }
}

TEST(AngleFlow, UnitSumsAtInteriorVertices) {
  for (auto [p, q, d] : {std::tuple{4, 4, 3}, {3, 7, 3}, {4, 5, 2}, {6, 3, 2}}) {
    auto sg = fixtures::packed(build_pq_tiling(p, q, d), fixtures::geometry_of(p, q));
    auto a = angle_flow(*sg);
    auto rep = flow_sum_defect(*sg, a);
    EXPECT_LT(rep.max_defect, 1e-10) << p << "," << q;
    EXPECT_GT(rep.checked, 0);
    EXPECT_GT(rep.flagged, 0);
    for (std::size_t i = 0; i < a.theta.size(); ++i) {
      EXPECT_GT(a.theta[i], 0.0);
      EXPECT_LT(a.theta[i], 1.0);
    }
  }
}

TEST(DimerHeight, ReferenceMatchingGivesZero) {
  auto r = hyperbolic_region(2);
  FaceGraph fg(r);
  auto flow = angle_flow(*r.sg);
  auto m = sample_matching(r, 4);
  auto h = dimer_height(fg, m, m, flow);
  for (int u = 0; u < fg.exterior(); ++u) EXPECT_EQ(h.at_node(u), 0.0);
}

TEST(DimerHeight, PreliminaryClosure) {
  for (const Region& r : {grid_region(5), hyperbolic_region(3)}) {
    FaceGraph fg(r);
    auto flow = angle_flow(*r.sg);
    MatchingSampler s(r);
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
      auto h = preliminary_height(fg, s.sample(rng), flow);
      EXPECT_LT(h.max_closure_residual, 1e-10);
      EXPECT_EQ(h.at(fg.center_quad()), 0.0);
    }
  }
}

TEST(DimerHeight, GridMatchedEdgeStepIsThreeQuarters) {
  auto r = grid_region(3);
  FaceGraph fg(r);
  auto flow = angle_flow(*r.sg);
  auto m = sample_matching(r, 9);
  auto h = preliminary_height(fg, m, flow);
  int matched = 0, unmatched = 0;
  for (const auto& c : fg.crossings()) {
    if (c.from == fg.exterior() || c.to == fg.exterior()) continue;
    double step = std::abs(h.value[c.from] - h.value[c.to]);
    if (m.contains(c.white, c.black)) {
      EXPECT_NEAR(step, 0.75, 1e-12);
      ++matched;
    } else {
      EXPECT_NEAR(step, 0.25, 1e-12);
      ++unmatched;
    }
  }
  EXPECT_GT(matched, 0);
  EXPECT_GT(unmatched, 0);
}

TEST(DoubleDimer, EqualMatchingsGiveZero) {
  auto r = grid_region(4);
  FaceGraph fg(r);
  auto m = sample_matching(r, 1);
  auto h = double_dimer_height(fg, m, m);
  for (double x : h.value) EXPECT_EQ(x, 0.0);
  EXPECT_TRUE(cycle_decomposition(m, m).components.empty());
}

TEST(DoubleDimer, AntisymmetricAndInteger) {
  auto r = hyperbolic_region(3);
  FaceGraph fg(r);
  MatchingSampler s(r);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    auto a = s.sample(rng), b = s.sample(rng);
    auto hab = double_dimer_height(fg, a, b), hba = double_dimer_height(fg, b, a);
    EXPECT_TRUE(hab.is_integer());
    EXPECT_EQ(hab.at_node(fg.exterior()), 0.0);
    for (int u = 0; u < fg.num_nodes(); ++u) EXPECT_EQ(hab.value[u], -hba.value[u]);
  }
}

TEST(DoubleDimer, DifferenceOfSingleHeights) {
  for (const Region& r : {grid_region(4), hyperbolic_region(2)}) {
    FaceGraph fg(r);
    auto flow = angle_flow(*r.sg);
    MatchingSampler s(r);
    Rng rng(21);
    auto m0 = s.sample(rng);
    const int f0 = fg.center_quad();
    for (int k = 0; k < 1000; ++k) {
      auto m1 = s.sample(rng), m2 = s.sample(rng);
      auto dd = double_dimer_height(fg, m1, m2);
      auto h1 = dimer_height(fg, m1, m0, flow), h2 = dimer_height(fg, m2, m0, flow);
      double shift = dd.at(f0);
      for (int u = 0; u < fg.exterior(); ++u) ASSERT_EQ(dd.value[u] - shift, h2.value[u] - h1.value[u]);
    }
  }
}

TEST(Cycles, ComponentsAlternateAndCoverDifference) {
  auto r = hyperbolic_region(2);
  MatchingSampler s(r);
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    auto a = s.sample(rng), b = s.sample(rng);
    auto d = cycle_decomposition(a, b);
    std::size_t diff = 0;
    for (int i = 0; i < r.size(); ++i) diff += a.black_of[i] != b.black_of[i];
    EXPECT_EQ(d.edge_count(), 2 * diff);
    for (const auto& c : d.components) {
      ASSERT_TRUE(c.closed);
      const std::size_t L = c.whites.size();
      ASSERT_GE(L, 2u);
      for (std::size_t i = 0; i < L; ++i) {
        EXPECT_TRUE(a.contains(c.whites[i], c.blacks[i]));
        EXPECT_TRUE(b.contains(c.whites[(i + 1) % L], c.blacks[i]));
        EXPECT_FALSE(b.contains(c.whites[i], c.blacks[i]));
      }
    }
  }
}

TEST(Cycles, WindingReproducesHeightExhaustively) {
  // every pair of matchings of two small regions
  for (const Region& r : {temperley_trim(fixtures::packed(build_pq_tiling(6, 3, 0), Geometry::euclidean)),
                          grid_region(2)}) {
    FaceGraph fg(r);
    auto all = oracle::matchings(r);
    const std::size_t stride = all.size() > 40 ? all.size() / 40 : 1;
    for (std::size_t i = 0; i < all.size(); i += stride)
      for (std::size_t j = 0; j < all.size(); ++j) {
        Matching a{&r, all[i]}, b{&r, all[j]};
        auto h = double_dimer_height(fg, a, b);
        auto d = cycle_decomposition(a, b);
        for (int u = 0; u < fg.exterior(); ++u) {
          int q = fg.quad_of(u);
          ASSERT_EQ(h.integer_at(q), winding_height(d, q));
          ASSERT_GE(enclosing_cycle_count(d, q), std::abs(h.integer_at(q)));
        }
        for (const auto& c : fg.crossings()) {
          int step = std::abs(static_cast<int>(h.value[c.from] - h.value[c.to]));
          ASSERT_EQ(step, a.contains(c.white, c.black) != b.contains(c.white, c.black) ? 1 : 0);
        }
      }
  }
}

TEST(Cycles, HeightGapBoundedBySeparatingLoops) {
  auto r = grid_region(6);
  FaceGraph fg(r);
  MatchingSampler s(r);
  Rng rng(44);
  const int f0 = fg.center_quad();
  for (int k = 0; k < 100; ++k) {
    auto a = s.sample(rng), b = s.sample(rng);
    auto h = double_dimer_height(fg, a, b);
    auto d = cycle_decomposition(a, b);
    for (int u = 0; u < fg.exterior(); u += 3) {
      int q = fg.quad_of(u);
      EXPECT_LE(std::abs(h.integer_at(q) - h.integer_at(f0)), separating_loops(d, q, f0));
    }
  }
}

TEST(Cycles, NestedLoopsFixture) {
  const int n = 6;
  auto sg = fixtures::packed(square_grid(n), Geometry::euclidean);
  auto r = temperley_trim(sg);
  CycleDecomposition d;
  d.region = &r;
  EXPECT_EQ(enclosing_cycle_count(d, 0), 0);
  d.components.push_back(box_loop(*sg, n, 2, 4));
  d.components.push_back(box_loop(*sg, n, 1, 5));
  int center = -1;
  for (int q = 0; q < static_cast<int>(sg->quads.size()); ++q)
    if (sg->quads[q].v == 3 * (n + 1) + 3) center = q;
  ASSERT_GE(center, 0);
  EXPECT_EQ(enclosing_cycle_count(d, center), 2);
  EXPECT_EQ(winding_height(d, center), -2);
  // corner quad at vertex (0,0)
  int corner = sg->quads_of_black[0].front();
  EXPECT_EQ(enclosing_cycle_count(d, corner), 0);
}

TEST(Clusters, FloodFillOnEqualHeights) {
  auto r = grid_region(6);
  FaceGraph fg(r);
  MatchingSampler s(r);
  Rng rng(10);
  auto m = s.sample(rng);
  auto same = level_clusters(double_dimer_height(fg, m, m));
  EXPECT_EQ(same.count(), 1);
  EXPECT_EQ(same.size[0], fg.num_nodes());
  for (int k = 0; k < 20; ++k) {
    auto h = double_dimer_height(fg, s.sample(rng), s.sample(rng));
    auto cl = level_clusters(h);
    int total = 0;
    for (int x : cl.size) total += x;
    EXPECT_EQ(total, fg.num_nodes());
    for (const auto& c : fg.crossings()) {
      bool equal = h.value[c.from] == h.value[c.to];
      EXPECT_EQ(cl.label[c.from] == cl.label[c.to], equal);
    }
    for (int u = 0; u < fg.num_nodes(); ++u) EXPECT_EQ(cl.level[cl.label[u]], std::llround(h.value[u]));
  }
}

TEST(Variance, ForcedEqualPairsHaveZeroVariance) {
  VarianceConfig cfg;
  cfg.family = Family::grid;
  cfg.radii = {2, 4};
  cfg.samples = 50;
  cfg.force_equal = true;
  auto t = variance_experiment(cfg);
  for (const auto& row : t.rows) {
    EXPECT_EQ(row.variance, 0.0);
    EXPECT_EQ(row.mean, 0.0);
  }
  EXPECT_EQ(t.slope, 0.0);
}

TEST(Variance, DeterministicAcrossWorkerCounts) {
  VarianceConfig cfg;
  cfg.family = Family::pq;
  cfg.radii = {1, 2};
  cfg.samples = 200;
  cfg.seed = 99;
  auto a = variance_experiment(cfg);
  cfg.jobs = 3;
  auto b = variance_experiment(cfg);
  EXPECT_EQ(a.csv(), b.csv());
  EXPECT_EQ(a.csv().rfind("radius,N,mean,var,stderr,slope_fit\n", 0), 0u);
  EXPECT_GT(a.rows[1].variance, 0.0);
}

TEST(Variance, SummaryStatistics) {
  auto row = summarize(3, {1, -1, 1, -1});
  EXPECT_DOUBLE_EQ(row.mean, 0.0);
  EXPECT_DOUBLE_EQ(row.variance, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(row.stderr_var, 0.0);
  VarianceTable t;
  t.rows = {{2, 10, 0, 1.0, 0.1}, {4, 10, 0, 2.0, 0.1}, {8, 10, 0, 3.0, 0.1}};
  fit_log_slope(t);
  EXPECT_NEAR(t.slope, 1.0 / std::log(2.0), 1e-12);
  EXPECT_GT(t.slope_stderr, 0.0);
}

TEST(Variance, ExactMatchesEnumeration) {
  std::vector<Region> regions{grid_region(2), fixtures::random_temperley_regions(8, 3, 12).at(2)};
  regions.push_back(temperley_trim(fixtures::packed(build_pq_tiling(6, 3, 0), Geometry::euclidean)));
  for (const auto& r : regions) {
    FaceGraph fg(r);
    auto all = oracle::matchings(r);
    std::vector<double> w;
    double z = 0.0;
    for (const auto& m : all) {
      w.push_back(oracle::matching_weight(r, m));
      z += w.back();
    }
    for (int u = 0; u < fg.exterior(); ++u) {
      int q = fg.quad_of(u);
      double second = 0.0;
      for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = 0; j < all.size(); ++j) {
          auto h = double_dimer_height(fg, Matching{&r, all[i]}, Matching{&r, all[j]}).at(q);
          second += w[i] * w[j] / (z * z) * h * h;
        }
      EXPECT_NEAR(exact_height_variance(fg, q), second, 1e-9);
      if (all.size() > 12) break;  // the larger fixtures only check one face
    }
  }
}

TEST(Variance, MonteCarloAgreesWithExact) {
  auto r = grid_region(6);
  FaceGraph fg(r);
  const int q = fg.center_quad();
  auto h = center_heights(r, 20000, 5, "check");
  auto row = summarize(6, h);
  EXPECT_NEAR(row.variance, exact_height_variance(fg, q), 4 * row.stderr_var);
  EXPECT_NEAR(row.mean, 0.0, 4 * std::sqrt(row.variance / row.n));
}

TEST(Variance, TwoCornerRegionsCarryHeights) {
  for (auto fam : {Family::grid, Family::pq}) {
    BoundarySpec spec{RegionKind::two_corner, 0, -1};
    auto ex = experiment_region(fam, 3, 7, fam == Family::grid ? 3 : 1, spec);
    EXPECT_EQ(ex.region.kind, RegionKind::two_corner);
    FaceGraph fg(ex.region);
    MatchingSampler s(ex.region);
    Rng rng(2);
    for (int k = 0; k < 50; ++k) {
      auto h = double_dimer_height(fg, s.sample(rng), s.sample(rng));
      EXPECT_EQ(h.max_closure_residual, 0.0);
    }
    auto row = summarize(1, center_heights(ex.region, 4000, 3, "tc"));
    EXPECT_NEAR(row.variance, exact_height_variance(fg, fg.center_quad()), 4 * row.stderr_var + 1e-12);
  }
}
