#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <set>

#include "concord/metrics.hpp"
#include "concord/shapes.hpp"
#include "concord/toyset.hpp"
#include "concord/views.hpp"
#include "oracles.hpp"

using namespace concord;

namespace {

std::vector<ViewPair> random_corpus(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PointCloud> clouds;
  for (std::size_t i = 0; i < count; ++i) {
    auto c = oracle::random_cloud(rng, 24);
    c.id = "c" + std::to_string(i);
    clouds.push_back(std::move(c));
  }
  return canonical_splits(clouds, 0.75, 7);
}

// The k lowest (or highest) scores by brute force, ties to the lower index.
std::vector<std::size_t> extreme_k(const std::vector<std::pair<double, std::size_t>>& scored, std::size_t k,
                                   bool highest) {
  auto v = scored;
  std::stable_sort(v.begin(), v.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return highest ? a.first > b.first : a.first < b.first;
    return a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(v[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Toyset, FixtureMinesExactlyN) {
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = random_corpus(20, 1);
  const auto d = mine_adversarial_subset(corpus, {5, 2, 10}, 3);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 1.0);
  ASSERT_EQ(d.members.size(), 10u);
  EXPECT_EQ(std::set<std::size_t>(d.members.begin(), d.members.end()).size(), 10u);
  for (auto m : d.members) EXPECT_LT(m, 20u);
  ASSERT_FALSE(d.groups.empty());
  EXPECT_EQ(d.members.front(), d.groups.front().anchor);  // first X always enters
}

TEST(Toyset, GroupsFollowAlgorithmOne) {
  const auto corpus = random_corpus(40, 2);
  const ToyParams p{8, 3, 25};
  const auto d = mine_adversarial_subset(corpus, p, 11);
  std::vector<std::size_t> replay;
  std::set<std::size_t> seen;
  for (const auto& g : d.groups) {
    std::vector<std::pair<double, std::size_t>> inc;
    for (std::size_t y = 0; y < corpus.size(); ++y)
      inc.push_back({oracle::cd_l2(corpus[g.anchor].incomplete, corpus[y].incomplete), y});
    const auto pool = extreme_k(inc, p.k1, false);
    std::vector<std::pair<double, std::size_t>> mis;
    for (auto z : pool) mis.push_back({oracle::cd_l2(corpus[g.anchor].missing, corpus[z].missing), z});
    auto adv = g.adversaries;
    std::sort(adv.begin(), adv.end());
    EXPECT_EQ(adv, extreme_k(mis, p.k2, true));
    for (auto id : std::vector<std::size_t>{g.anchor}) {
      if (seen.insert(id).second) replay.push_back(id);
    }
    for (auto id : g.adversaries) {
      if (seen.insert(id).second) replay.push_back(id);
    }
  }
  ASSERT_GE(replay.size(), p.n);
  replay.resize(p.n);
  EXPECT_EQ(replay, d.members);
  EXPECT_EQ(mine_adversarial_subset(corpus, p, 11).members, d.members);
}

TEST(Toyset, Errors) {
  const auto corpus = random_corpus(6, 3);
  try {
    mine_adversarial_subset(corpus, {6, 2, 3}, 1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientCorpus);
  }
  EXPECT_THROW(mine_adversarial_subset(corpus, {2, 3, 3}, 1), Error);  // k2 > k1
  try {
    sample_uniform_subset(5, 6, 1);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientCorpus);
  }
}

TEST(Toyset, WholeCorpusMinesEverything) {
  // n equal to the corpus size cannot exceed n; the loop ends when all are taken.
  const auto corpus = random_corpus(8, 4);
  const auto d = mine_adversarial_subset(corpus, {3, 2, 8}, 5);
  EXPECT_EQ(std::set<std::size_t>(d.members.begin(), d.members.end()).size(), 8u);
}

TEST(Toyset, UniformSubset) {
  auto all = sample_uniform_subset(50, 50, 9);
  EXPECT_EQ(sample_uniform_subset(50, 50, 9), all);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(all[i], i);
  EXPECT_NE(sample_uniform_subset(50, 10, 9), sample_uniform_subset(50, 10, 10));
}

TEST(Toyset, UniformSubsetFamilyFrequencies) {
  // 5 families of 4000 contiguous indices; each count ~ hypergeometric, bounded
  // here by the (wider) binomial 3 sigma.
  const std::size_t n = 5000, size = 20000;
  const auto ids = sample_uniform_subset(size, n, 123);
  std::set<std::size_t> unique(ids.begin(), ids.end());
  EXPECT_EQ(unique.size(), n);
  std::vector<double> counts(5, 0.0);
  for (auto id : ids) counts[id / 4000] += 1;
  const double sigma = std::sqrt(n * 0.2 * 0.8);
  for (double c : counts) EXPECT_NEAR(c, n * 0.2, 3 * sigma);
}

TEST(Shapes, CuboidFaceFractions) {
  ShapeDims d;
  d.length = d.width = d.height = 2.0;
  Rng rng(1);
  const auto c = sample_surface(ShapeFamily::CuboidShell, d, 100000, rng);
  std::vector<double> faces(6, 0.0);
  for (const auto& p : c.points) {
    int axis = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(p[k]) > std::abs(p[axis])) axis = k;
    EXPECT_NEAR(std::abs(p[axis]), 1.0, 1e-12);
    faces[2 * axis + (p[axis] > 0)] += 1;
  }
  for (double f : faces) EXPECT_NEAR(f / 100000.0, 1.0 / 6, 0.01);

  // Unequal faces: 3 x 1 x 0.5 box.
  d.length = 3, d.width = 1, d.height = 0.5;
  const auto b = sample_surface(ShapeFamily::CuboidShell, d, 100000, rng);
  const double total = 2 * (3 * 1 + 3 * 0.5 + 1 * 0.5);
  double top = 0;
  for (const auto& p : b.points) top += std::abs(std::abs(p[2]) - 0.25) < 1e-12;
  EXPECT_NEAR(top / 100000.0, 2 * 3.0 / total, 0.01);
}

TEST(Shapes, CorpusNormalizedAndDeterministic) {
  const auto specs = default_shape_specs(64);
  const auto a = generate_shape_corpus(specs, 4, 42);
  const auto b = generate_shape_corpus(specs, 4, 42);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_EQ(a[i].size(), 64u);
    double m = 0;
    for (const auto& p : a[i].points) m = std::max(m, std::sqrt(oracle::sq(p, {0, 0, 0})));
    EXPECT_NEAR(m, 1.0, 1e-9);
  }
  EXPECT_EQ(a[0].id, "cuboid-00000");
  EXPECT_EQ(a[19].id, "l-bracket-00003");
  EXPECT_NE(generate_shape_corpus(specs, 4, 43)[0], a[0]);
}

TEST(Shapes, InvalidDimensions) {
  ShapeDims d;
  d.width = 0;
  Rng rng(1);
  try {
    sample_surface(ShapeFamily::CuboidShell, d, 10, rng);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidShape);
  }
  d.width = 1;
  d.radius = -1;
  EXPECT_THROW(sample_surface(ShapeFamily::Cylinder, d, 10, rng), Error);
  EXPECT_NO_THROW(sample_surface(ShapeFamily::CuboidShell, d, 10, rng));  // radius unused
}

TEST(Shapes, TableBedAmbiguity) {
  // Same slab and legs; the bed adds a tall headboard at +x. Both share one
  // frame (scaled by the bed's extent). Seen from the far side the partial
  // clouds match while the complete shapes do not.
  ShapeDims d;
  d.length = 2, d.width = 1, d.thickness = 0.1, d.leg_height = 0.5, d.leg_thickness = 0.1, d.board_height = 2.5;
  Rng r1(1), r2(2);
  auto table = sample_surface(ShapeFamily::Table, d, 4096, r1);
  auto bed = sample_surface(ShapeFamily::Bed, d, 4096, r2);
  double s = 0;
  for (const auto& p : bed.points) s = std::max(s, std::sqrt(oracle::sq(p, {0, 0, 0})));
  for (auto* c : {&table, &bed})
    for (auto& p : c->points)
      for (auto& v : p) v /= s;
  const Point3 vp{std::sqrt(1 - 0.81), 0, 0.9};
  const auto st = split_by_viewpoint(table, {vp, 0.5});
  const auto sb = split_by_viewpoint(bed, {vp, 0.5});
  EXPECT_LT(chamfer_l2(st.incomplete, sb.incomplete), 0.01);
  EXPECT_GT(chamfer_l2(table, bed), 0.1);
}

TEST(Toyset, CanonicalSplitsFixed) {
  Rng rng(5);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < 3; ++i) {
    clouds.push_back(oracle::random_cloud(rng, 40));
    clouds.back().id = "k" + std::to_string(i);
  }
  const auto a = canonical_splits(clouds, 0.75, 7);
  const auto b = canonical_splits(clouds, 0.75, 7);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].missing, b[i].missing);
    EXPECT_EQ(a[i].missing.size(), 30u);
    EXPECT_EQ(a[i].missing, sample_view_set(clouds[i], 1, 0.75, 7)[0].missing);
  }
}
