#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "concord/metrics.hpp"
#include "concord/neighbor_index.hpp"
#include "oracles.hpp"

using namespace concord;

namespace {

PointCloud cloud(std::vector<Point3> pts) { return PointCloud(std::move(pts)); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(NeighborIndex, Singleton) {
  const auto idx = build_index(cloud({{0.3, 0.1, -0.2}}));
  Rng rng(1);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(idx.nearest(rng.unit_vector()).id, 0u);
  const auto n = build_index(cloud({{0, 0, 0}})).nearest({1, 0, 0});
  EXPECT_EQ(n.id, 0u);
  EXPECT_EQ(n.sq_dist, 1.0);
}

TEST(NeighborIndex, TieBreaksToLowestId) {
  const auto n = build_index(cloud({{-1, 0, 0}, {1, 0, 0}})).nearest({0, 0, 0});
  EXPECT_EQ(n.id, 0u);
  EXPECT_EQ(n.sq_dist, 1.0);
  // Exact duplicates spread through a larger tree.
  std::vector<Point3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({static_cast<double>(i % 10), 0, 0});
  const NeighborIndex idx{std::span<const Point3>(pts)};
  for (int v = 0; v < 10; ++v) EXPECT_EQ(idx.nearest({static_cast<double>(v), 0, 0}).id, static_cast<std::size_t>(v));
}

TEST(NeighborIndex, Errors) {
  EXPECT_EQ(code_of([] { build_index(PointCloud{}); }), ErrorCode::EmptyCloud);
  EXPECT_EQ(code_of([] { build_index(cloud({{0, std::nan(""), 0}})); }), ErrorCode::InvalidCoordinate);
  const auto idx = build_index(cloud({{0, 0, 0}}));
  EXPECT_EQ(code_of([&] { idx.nearest({std::numeric_limits<double>::infinity(), 0, 0}); }),
            ErrorCode::InvalidCoordinate);
}

TEST(NeighborIndex, MatchesLinearScan) {
  Rng rng(7);
  for (std::size_t size : {1000u, 500u, 33u}) {
    const auto c = oracle::random_cloud(rng, size);
    const auto idx = build_index(c);
    for (int q = 0; q < 500; ++q) {
      const Point3 query{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
      const auto got = idx.nearest(query);
      const auto want = oracle::nearest(c.points, query);
      ASSERT_EQ(got.id, want);
      ASSERT_EQ(got.sq_dist, oracle::sq(c[want], query));
      ASSERT_EQ(got, nearest_linear(c.points, query));
    }
  }
}

TEST(NeighborIndex, GridTies) {
  // Integer lattice: many equidistant candidates per query.
  std::vector<Point3> pts;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y)
      for (int z = 0; z < 6; ++z) pts.push_back({double(x), double(y), double(z)});
  Rng rng(3);
  rng.shuffle(pts);
  const NeighborIndex idx{std::span<const Point3>(pts)};
  for (int q = 0; q < 300; ++q) {
    const Point3 query{0.5 * static_cast<double>(rng.below(12)), 0.5 * static_cast<double>(rng.below(12)),
                       0.5 * static_cast<double>(rng.below(12))};
    EXPECT_EQ(idx.nearest(query).id, oracle::nearest(pts, query));
  }
}

TEST(Metrics, SpecExamples) {
  EXPECT_EQ(chamfer_l2(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})), 2.0);
  EXPECT_EQ(chamfer_l2(cloud({{0, 0, 0}, {2, 0, 0}}), cloud({{1, 0, 0}})), 2.0);
  EXPECT_EQ(chamfer_l1(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})), 1.0);
  EXPECT_NEAR(density_aware_cd(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})), 2 * (1 - std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(density_aware_cd(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})), 1.264241, 1e-6);

  EXPECT_EQ(f1_at_threshold(cloud({{0, 0, 0}}), cloud({{0.02, 0, 0}}), 0.01).f1, 0.0);
  const auto f = f1_at_threshold(cloud({{0, 0, 0}, {1, 0, 0}}), cloud({{0.005, 0, 0}, {2, 0, 0}}), 0.01);
  EXPECT_EQ(f.precision, 0.5);
  EXPECT_EQ(f.recall, 0.5);
  EXPECT_EQ(f.f1, 0.5);
}

TEST(Metrics, Errors) {
  const auto a = cloud({{0, 0, 0}});
  EXPECT_EQ(code_of([&] { chamfer_l2(a, PointCloud{}); }), ErrorCode::EmptyCloud);
  EXPECT_EQ(code_of([&] { chamfer_l1(PointCloud{}, a); }), ErrorCode::EmptyCloud);
  EXPECT_EQ(code_of([&] { density_aware_cd(a, PointCloud{}); }), ErrorCode::EmptyCloud);
  EXPECT_EQ(code_of([&] { f1_at_threshold(a, a, 0.0); }), ErrorCode::InvalidThreshold);
  EXPECT_EQ(code_of([&] { f1_at_threshold(a, a, -1.0); }), ErrorCode::InvalidThreshold);
}

TEST(Metrics, ThresholdIsInclusive) {
  // 0.5 and 0.25 are exact in binary, so the distance equals tau exactly.
  const auto f = f1_at_threshold(cloud({{0, 0, 0}}), cloud({{0.5, 0, 0}}), 0.5);
  EXPECT_EQ(f.f1, 1.0);
}

TEST(Metrics, MatchBruteForce) {
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    const auto a = oracle::random_cloud(rng, 1 + rng.below(130));
    const auto b = oracle::random_cloud(rng, 1 + rng.below(130), 0.5);
    EXPECT_NEAR(chamfer_l2(a, b), oracle::cd_l2(a, b), 1e-12 * oracle::cd_l2(a, b));
    EXPECT_NEAR(chamfer_l1(a, b), oracle::cd_l1(a, b), 1e-12 * oracle::cd_l1(a, b));
    EXPECT_NEAR(density_aware_cd(a, b), oracle::da_cd(a, b), 1e-12);
    const double tau = rng.uniform(0.01, 0.3);
    EXPECT_NEAR(f1_at_threshold(a, b, tau).f1, oracle::f1(a, b, tau), 1e-12);
  }
}

TEST(Metrics, PropertiesOnRandomPairs) {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    auto a = oracle::random_cloud(rng, 1 + rng.below(80));
    const auto b = oracle::random_cloud(rng, 1 + rng.below(80), 2.0);
    EXPECT_EQ(chamfer_l2(a, b), chamfer_l2(b, a));
    EXPECT_EQ(chamfer_l1(a, b), chamfer_l1(b, a));
    EXPECT_EQ(density_aware_cd(a, b), density_aware_cd(b, a));
    EXPECT_EQ(chamfer_l2(a, a), 0.0);
    EXPECT_EQ(chamfer_l1(a, a), 0.0);
    EXPECT_EQ(density_aware_cd(a, a), 0.0);
    EXPECT_EQ(f1_at_threshold(a, a, 0.01).f1, 1.0);
    EXPECT_GE(chamfer_l2(a, b), 0.0);
    EXPECT_LT(density_aware_cd(a, b), 2.0);

    // Permutation invariance, up to summation order.
    auto shuffled = a;
    rng.shuffle(shuffled.points);
    EXPECT_NEAR(chamfer_l2(shuffled, b), chamfer_l2(a, b), 1e-12);
    EXPECT_NEAR(density_aware_cd(shuffled, b), density_aware_cd(a, b), 1e-12);
  }
}

TEST(Metrics, DensityAwareSharesArgmin) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::random_cloud(rng, 64);
    const auto b = oracle::random_cloud(rng, 64);
    // Both metrics read the same match lists; check them against the oracle ids.
    const auto m = match_pair(a, b);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(m.a_to_b[i].id, oracle::nearest(b.points, a[i]));
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(m.b_to_a[i].id, oracle::nearest(a.points, b[i]));
  }
}

TEST(Metrics, DuplicatePointsAllowed) {
  const auto a = cloud({{0, 0, 0}, {0, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(chamfer_l2(a, a), 0.0);
  EXPECT_NEAR(chamfer_l2(a, cloud({{0, 0, 0}})), 3.0 / 3.0 + 0.0, 1e-15);
}
