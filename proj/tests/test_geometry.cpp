#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace lipcert;

namespace {

PolylineBoundary square(double h) { return PolylineBoundary::from_loops({{{-h, -h}, {h, -h}, {h, h}, {-h, h}}}); }

PolylineBoundary regular_polygon(std::size_t n, double r, double cx = 0.0, double cy = 0.0) {
  std::vector<Point2> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * double(i) / double(n);
    v.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return PolylineBoundary::from_loops({v});
}

}  // namespace

TEST(Snowflake, SegmentCounts) {
  EXPECT_EQ(koch_snowflake(0).segments().size(), 3u);
  EXPECT_EQ(koch_snowflake(4).segments().size(), 768u);
  EXPECT_EQ(koch_snowflake(4).loop_count(), 1u);
  EXPECT_THROW(koch_snowflake(9), Error);
}

TEST(Snowflake, PerimeterGrowsByFourThirds) {
  const double triangle = 3.0 * std::sqrt(3.0);  // side √3 for the inscribed triangle
  for (std::size_t k = 0; k <= 6; ++k)
    EXPECT_NEAR(koch_snowflake(k).perimeter(), std::pow(4.0 / 3.0, double(k)) * triangle, 1e-9);
}

TEST(Snowflake, BumpsPointOutward) {
  // every vertex lies inside the circumscribed circle of radius 1 and the
  // center is inside the loop
  const auto b = koch_snowflake(3);
  EXPECT_EQ(b.depth({0, 0}), 1u);
  for (const auto& p : b.loops()[0]) EXPECT_LE(norm(p), 1.0 + 1e-12);
  EXPECT_EQ(b.depth({0, 1.1}), 0u);
}

TEST(SignedDistance, BoundaryAndSquare) {
  const auto b = square(1);
  EXPECT_NEAR(signed_distance(b, {}, {1.0, 0.3}), 0.0, 1e-15);
  EXPECT_NEAR(signed_distance(b, {}, {0.25, -1.0}), 0.0, 1e-15);
  EXPECT_NEAR(signed_distance(b, {}, {0, 0}), 1.0, 1e-15);
  EXPECT_NEAR(signed_distance(b, {}, {3, 0}), -2.0, 1e-15);
  EXPECT_NEAR(signed_distance(b, {}, {2, 2}), -std::sqrt(2.0), 1e-15);
}

TEST(SignedDistance, PolygonApproximatesCircle) {
  const auto b = regular_polygon(64, 1.0);
  for (double a = 0; a < 6.28; a += 0.37)
    EXPECT_NEAR(signed_distance(b, {}, {0.3 * std::cos(a), 0.3 * std::sin(a)}), 0.7, 2e-3);
}

TEST(SignedDistance, MatchesSampledOracle) {
  const auto b = koch_snowflake(1);
  std::vector<std::pair<double, double>> v;
  for (const auto& p : b.loops()[0]) v.emplace_back(p.x, p.y);
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Point2 x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    EXPECT_NEAR(std::abs(signed_distance(b, {}, x)), oracle::polygon_distance_sampled(v, x.x, x.y), 1e-4);
  }
}

TEST(SignedDistance, NestedLoopsUseDepthParity) {
  // annulus between two squares: positive only in the ring
  const auto b = PolylineBoundary::from_loops(
      {{{-2, -2}, {2, -2}, {2, 2}, {-2, 2}}, {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}});
  EXPECT_LT(signed_distance(b, {}, {0, 0}), 0.0);
  EXPECT_GT(signed_distance(b, {}, {1.5, 0}), 0.0);
  EXPECT_LT(signed_distance(b, {}, {3, 0}), 0.0);
  RegionLabeler core{{0, 2}};  // custom positive set
  EXPECT_GT(signed_distance(b, core, {0, 0}), 0.0);
  EXPECT_LT(signed_distance(b, core, {1.5, 0}), 0.0);
}

TEST(SignedDistance, IsOneLipschitz) {
  const auto b = koch_snowflake(3);
  const double slope = testutil::max_pair_slope(
      [&](const Vector& x) { return signed_distance(b, {}, {x[0], x[1]}); }, 2, 100000, 3, 1.3);
  EXPECT_LE(slope, 1.0 + 1e-12);
}

TEST(SignedDistance, UnitGradientAwayFromRidges) {
  const auto b = koch_snowflake(2);
  const SdfModel sdf(b, {});
  const double h = 1e-6;
  Rng rng(4);
  int checked = 0;
  for (int t = 0; t < 400 && checked < 100; ++t) {
    const Point2 x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    const double d = std::abs(signed_distance(b, {}, x));
    if (d < 2 * h) continue;
    const double gx = (signed_distance(b, {}, {x.x + h, x.y}) - signed_distance(b, {}, {x.x - h, x.y})) / (2 * h);
    const double gy = (signed_distance(b, {}, {x.x, x.y + h}) - signed_distance(b, {}, {x.x, x.y - h})) / (2 * h);
    const Point2 g = sdf.gradient(x);
    if (std::abs(gx - g.x) > 1e-4 || std::abs(gy - g.y) > 1e-4) continue;  // equidistance ridge
    EXPECT_NEAR(std::hypot(gx, gy), 1.0, 1e-6);
    ++checked;
  }
  EXPECT_GE(checked, 90);
}

TEST(SignedDistance, DescentStepReachesBoundary) {
  // The step always lands within the overshoot of the boundary. It fails to
  // change sign only outside a convex tip: past the vertex the ray stays
  // outside unless it points into the tip's interior angle.
  const auto b = koch_snowflake(4);
  const SdfModel sdf(b, {});
  Rng rng(5);
  int crossed = 0, total = 0;
  for (int t = 0; t < 2000; ++t) {
    const Point2 x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    const double f = signed_distance(b, {}, x);
    if (f == 0.0) continue;
    const double len = std::abs(f) * (1 + 1e-6);
    const Point2 y = x - (f > 0 ? len : -len) * sdf.gradient(x);
    const double fy = signed_distance(b, {}, y);
    ++total;
    EXPECT_LE(std::abs(fy), 1e-6 * std::abs(f) + 1e-12);
    if ((fy > 0) != (f > 0)) {
      ++crossed;
      continue;
    }
    EXPECT_LT(f, 0.0);
    const Point2 n = b.nearest(x).point;
    bool at_vertex = false;
    for (const auto& s : b.segments()) at_vertex = at_vertex || std::hypot(s.p.x - n.x, s.p.y - n.y) < 1e-12;
    EXPECT_TRUE(at_vertex);
  }
  EXPECT_GE(crossed, total * 8 / 10);
}

TEST(Boundary, RejectsDegenerateLoops) {
  try {
    PolylineBoundary::from_loops({{{0, 0}, {1, 0}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidBoundary);
  }
  EXPECT_THROW(PolylineBoundary::from_loops({{{0, 0}, {1, 0}, {1, 0}, {0, 1}}}), Error);
  // explicit closing vertex is accepted
  EXPECT_EQ(PolylineBoundary::from_loops({{{0, 0}, {1, 0}, {0, 1}, {0, 0}}}).segments().size(), 3u);
}

TEST(MulticlassSdf, TieGivesZeroVector) {
  RegionPartition part{{PolylineBoundary::from_loops({{{-2, -1}, {-1, -1}, {-1, 1}, {-2, 1}}}),
                        PolylineBoundary::from_loops({{{1, -1}, {2, -1}, {2, 1}, {1, 1}}}), PolylineBoundary{}}};
  // x = origin is 1 from region 0 and 1 from region 1 but inside region 2
  const Vector v = multiclass_sdf(part, {0, 0});
  EXPECT_EQ(v, (Vector{0.0, 0.0, 1.0}));
  // a point on the shared boundary of regions 0 and 2
  EXPECT_EQ(multiclass_sdf(part, {-1, 0}), (Vector{0.0, 0.0, 0.0}));
}

TEST(MulticlassSdf, TwoClassesReduceToSignedDistance) {
  const auto b = koch_snowflake(2);
  RegionPartition part{{b, PolylineBoundary{}}};
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const Point2 x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    const double sd = signed_distance(b, {}, x);
    const Vector v = multiclass_sdf(part, x);
    if (sd == 0.0) continue;
    EXPECT_NEAR(v[sd > 0 ? 0 : 1], std::abs(sd), 1e-15);
    EXPECT_EQ(v[sd > 0 ? 1 : 0], 0.0);
  }
}

TEST(MulticlassSdf, IsOneLipschitz) {
  RegionPartition part{{regular_polygon(7, 0.5, -0.6, 0.0), regular_polygon(5, 0.4, 0.6, 0.2), PolylineBoundary{}}};
  Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 20000; ++t) {
    const Point2 x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
    const Point2 z{x.x + rng.uniform(-0.2, 0.2), x.y + rng.uniform(-0.2, 0.2)};
    const Vector a = multiclass_sdf(part, x), b = multiclass_sdf(part, z);
    worst = std::max(worst, distance(a, b) / norm(x - z));
  }
  EXPECT_LE(worst, 1.0 + 1e-9);
}

TEST(GridDataset, SizesAndCorners) {
  const auto b = koch_snowflake(1);
  const auto g2 = sdf_grid_dataset(b, {}, 2);
  ASSERT_EQ(g2.size(), 4u);
  EXPECT_EQ(g2.points(0, 0), -1.2);
  EXPECT_EQ(g2.points(3, 1), 1.2);
  EXPECT_EQ(sdf_grid_dataset(b, {}, 400).size(), 160000u);
}

TEST(GridDataset, TargetsOneLipschitzOnNeighbors) {
  const std::size_t n = 60;
  const auto g = sdf_grid_dataset(koch_snowflake(3), {}, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c + 1 < n; ++c) {
      const std::size_t i = r * n + c;
      for (std::size_t j : {i + 1, r + 1 < n ? i + n : i}) {
        if (j == i) continue;
        const double d = distance(g.points.row(i), g.points.row(j));
        EXPECT_LE(std::abs(g.targets[i] - g.targets[j]), d * (1 + 1e-12));
      }
      EXPECT_EQ(g.labels[r * n + c], g.targets[r * n + c] >= 0 ? 1 : -1);
    }
}
