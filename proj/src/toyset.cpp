#include "concord/toyset.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "concord/metrics.hpp"
#include "concord/rng.hpp"
#include "concord/views.hpp"

namespace concord {

void ToyParams::validate() const {
  if (k1 < 1 || k2 < 1 || k2 > k1 || n < 1) {
    throw Error(ErrorCode::InvalidArgument, "toy parameters need 1 <= k2 <= k1 and n >= 1");
  }
}

std::vector<ViewPair> canonical_splits(const std::vector<PointCloud>& corpus, double ratio, std::uint64_t seed) {
  std::vector<ViewPair> out;
  out.reserve(corpus.size());
  for (const auto& cloud : corpus) out.push_back(sample_view_set(cloud, 1, ratio, seed).front());
  return out;
}

namespace {

// Indices of the k best scores; `before` orders scores, ties go to the lower index.
template <typename Before>
std::vector<std::size_t> select_k(const std::vector<double>& scores, const std::vector<std::size_t>& ids,
                                  std::size_t k, Before before) {
  std::vector<std::size_t> pos(scores.size());
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  k = std::min(k, pos.size());
  std::partial_sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return before(scores[a], scores[b]);
    return ids[a] < ids[b];
  });
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[pos[i]]);
  return out;
}

}  // namespace

MinedDataset mine_adversarial_subset(const std::vector<ViewPair>& corpus, const ToyParams& params,
                                     std::uint64_t seed) {
  params.validate();
  if (corpus.size() <= params.k1 || corpus.size() < params.n) {
    throw Error(ErrorCode::InsufficientCorpus, "corpus of " + std::to_string(corpus.size()) + " for k1 = " +
                                                   std::to_string(params.k1) + ", n = " + std::to_string(params.n));
  }
  Rng rng(derive_seed(seed, 0x746f79));
  MinedDataset out;
  std::unordered_set<std::size_t> taken;
  const auto add = [&](std::size_t id) {
    if (taken.insert(id).second) out.members.push_back(id);
  };

  std::vector<std::size_t> all(corpus.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> inc_scores(corpus.size());

  // Loop while len <= n; a corpus of exactly n elements can never exceed n,
  // so stop once everything has been taken.
  while (out.members.size() <= params.n && out.members.size() < corpus.size()) {
    const std::size_t x = static_cast<std::size_t>(rng.below(corpus.size()));
    for (std::size_t y = 0; y < corpus.size(); ++y) {
      inc_scores[y] = chamfer_l2(corpus[x].incomplete, corpus[y].incomplete);
    }
    const auto pool = select_k(inc_scores, all, params.k1, std::less<double>{});

    std::vector<double> mis_scores;
    mis_scores.reserve(pool.size());
    for (std::size_t z : pool) mis_scores.push_back(chamfer_l2(corpus[x].missing, corpus[z].missing));
    const auto adversaries = select_k(mis_scores, pool, params.k2, std::greater<double>{});

    add(x);
    for (std::size_t z : adversaries) add(z);
    out.groups.push_back({x, adversaries});
  }
  out.members.resize(std::min(out.members.size(), params.n));
  return out;
}

std::vector<std::size_t> sample_uniform_subset(std::size_t corpus_size, std::size_t n, std::uint64_t seed) {
  if (n > corpus_size) {
    throw Error(ErrorCode::InsufficientCorpus,
                "cannot draw " + std::to_string(n) + " from " + std::to_string(corpus_size));
  }
  std::vector<std::size_t> ids(corpus_size);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x756e69));
  rng.shuffle(ids);
  ids.resize(n);
  return ids;
}

NeighborGroupStats neighbor_group_stats(const std::vector<ViewPair>& corpus, const std::vector<std::size_t>& members,
                                        std::size_t k) {
  if (members.size() < 2 || k < 1) throw Error(ErrorCode::InvalidArgument, "need >= 2 members and k >= 1");
  k = std::min(k, members.size() - 1);
  const std::size_t m = members.size();
  std::vector<double> inc(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      inc[i * m + j] = inc[j * m + i] = chamfer_l2(corpus[members[i]].incomplete, corpus[members[j]].incomplete);
    }
  }
  NeighborGroupStats stats;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> scores;
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      scores.push_back(inc[i * m + j]);
      others.push_back(j);
    }
    for (std::size_t j : select_k(scores, others, k, std::less<double>{})) {
      stats.mean_incomplete_cd += inc[i * m + j];
      stats.mean_missing_cd += chamfer_l2(corpus[members[i]].missing, corpus[members[j]].missing);
      ++pairs;
    }
  }
  stats.mean_incomplete_cd /= static_cast<double>(pairs);
  stats.mean_missing_cd /= static_cast<double>(pairs);
  return stats;
}

}  // namespace concord
