#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "concord/model.hpp"
#include "concord/optimizer.hpp"
#include "concord/train.hpp"
#include "concord/views.hpp"
#include "oracles.hpp"

using namespace concord;
namespace fs = std::filesystem;

namespace {

// Independent straight-line evaluation straight from layer_layouts.
PointCloud forward_oracle(const ModelParams& p, const PointCloud& in) {
  const auto layouts = layer_layouts(p.shape);
  const std::size_t enc = p.shape.encoder_widths.size();
  const auto layer = [&](const LayerLayout& L, const std::vector<double>& x, bool relu) {
    std::vector<double> y(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      double s = p.values[L.bias_offset + o];
      for (std::size_t i = 0; i < L.in; ++i) s += p.values[L.weight_offset + o * L.in + i] * x[i];
      y[o] = relu ? std::max(s, 0.0) : s;
    }
    return y;
  };
  std::vector<double> code(p.shape.latent_dim(), -1e300);
  for (const auto& pt : in.points) {
    std::vector<double> h(pt.begin(), pt.end());
    for (std::size_t l = 0; l < enc; ++l) h = layer(layouts[l], h, true);
    for (std::size_t c = 0; c < code.size(); ++c) code[c] = std::max(code[c], h[c]);
  }
  for (std::size_t l = enc; l < layouts.size(); ++l) code = layer(layouts[l], code, l + 1 < layouts.size());
  PointCloud out;
  for (std::size_t i = 0; i < p.shape.output_points; ++i) out.points.push_back({code[3 * i], code[3 * i + 1], code[3 * i + 2]});
  return out;
}

ModelShape tiny_shape(std::size_t input_points) {
  ModelShape s;
  s.input_points = input_points;
  s.encoder_widths = {4};
  s.decoder_widths = {5};
  s.output_points = 2;
  return s;
}

CompletionSample tiny_sample(Rng& rng, std::size_t points, std::size_t views) {
  CompletionSample s;
  s.gt_complete = oracle::random_cloud(rng, points);
  s.gt_complete.id = "t" + std::to_string(rng.below(1u << 20));
  s.views = sample_view_set(s.gt_complete, views, 0.5, rng.below(1u << 20));
  return s;
}

double loss_at(const ModelParams& p, CompletionSample s, const LossWeights& w) {
  predict_views(p, s);
  return total_loss(s, w);
}

std::vector<PointCloud> small_corpus(std::size_t count, std::size_t points, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PointCloud> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(oracle::random_cloud(rng, points));
    out.back().id = "o" + std::to_string(i);
  }
  return out;
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.views = 3;
  c.lr_max = 1e-3;
  c.lr_min = 1e-4;
  c.encoder_widths = {8, 16};
  c.decoder_widths = {16};
  c.weights = {0.1, 1, 0};
  c.train_eval_objects = 4;
  return c;
}

}  // namespace

TEST(Model, ForwardMatchesStraightLine) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    ModelShape s;
    s.input_points = 1 + rng.below(30);
    s.encoder_widths = {1 + rng.below(8), 1 + rng.below(8)};
    s.decoder_widths = {1 + rng.below(10)};
    s.output_points = 1 + rng.below(6);
    auto p = init_params(s, rng.below(1000));
    for (auto& v : p.values) v += rng.uniform(-0.1, 0.1);  // nonzero biases too
    const auto in = oracle::random_cloud(rng, s.input_points);
    const auto got = forward(p, in);
    const auto want = forward_oracle(p, in);
    ASSERT_EQ(got.size(), s.output_points);
    for (std::size_t i = 0; i < got.size(); ++i)
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(got[i][k], want[i][k], 1e-9);
  }
}

TEST(Model, PermutationInvariantAndZero) {
  Rng rng(2);
  ModelShape s;
  s.input_points = 40;
  const auto p = init_params(s, 3);
  auto in = oracle::random_cloud(rng, 40);
  const auto out = forward(p, in);
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(in.points);
    EXPECT_EQ(forward(p, in), out);
  }
  for (const auto& pt : forward(zero_params(s), in).points) EXPECT_EQ(pt, (Point3{0, 0, 0}));
  try {
    forward(p, oracle::random_cloud(rng, 39));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Model, InitIsSeededFanIn) {
  ModelShape s;
  const auto a = init_params(s, 5);
  EXPECT_EQ(a, init_params(s, 5));
  EXPECT_NE(a, init_params(s, 6));
  for (const auto& l : layer_layouts(s)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.in * l.out; ++i) EXPECT_LE(std::abs(a.values[l.weight_offset + i]), bound);
    for (std::size_t i = 0; i < l.out; ++i) EXPECT_EQ(a.values[l.bias_offset + i], 0.0);
  }
}

TEST(Model, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  for (const LossWeights w : {LossWeights{0, 0, 0}, LossWeights{0.1, 1, 0}, LossWeights{0.1, 1, 0.5}}) {
    std::size_t checked = 0;
    for (int t = 0; t < 20; ++t) {
      const auto sample = tiny_sample(rng, 8 + 2 * rng.below(12), 3);
      auto p = init_params(tiny_shape(sample.views[0].incomplete.size()), rng.below(1u << 20));
      for (auto& v : p.values) v += rng.uniform(-0.2, 0.2);
      const auto g = backward(p, sample, w);
      EXPECT_NEAR(g.loss, loss_at(p, sample, w), 1e-12);
      const auto r = oracle::check_gradient(p.values, g.grads, [&] { return loss_at(p, sample, w); });
      EXPECT_LT(r.max_rel, 1e-3);
      checked += r.checked;
    }
    EXPECT_GT(checked, 500u);
  }
}

TEST(Model, PerfectFitHasZeroGradient) {
  Rng rng(4);
  const auto sample = tiny_sample(rng, 20, 1);
  ModelShape s = tiny_shape(10);
  s.output_points = 10;
  auto p = zero_params(s);
  const auto last = layer_layouts(s).back();
  for (std::size_t i = 0; i < 10; ++i)
    for (int k = 0; k < 3; ++k) p.values[last.bias_offset + 3 * i + k] = sample.views[0].missing[i][k];
  const auto g = backward(p, sample, {0, 1, 0.5});
  EXPECT_EQ(g.loss, 0.0);
  for (double v : g.grads) EXPECT_EQ(v, 0.0);
}

TEST(Model, AlphaScalesOnlyTheSelfGuidedPart) {
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    const auto sample = tiny_sample(rng, 24, 3);
    const auto p = init_params(tiny_shape(12), rng.below(1000));
    const auto g0 = backward(p, sample, {0, 1, 0.5}).grads;
    const auto g1 = backward(p, sample, {0.3, 1, 0.5}).grads;
    const auto g2 = backward(p, sample, {0.6, 1, 0.5}).grads;
    for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_NEAR(g2[i] - g1[i], g1[i] - g0[i], 1e-10);
  }
}

TEST(Optimizer, AdamWExamples) {
  {
    OptimizerState st(1, {0.9, 0.999, 1e-8, 0.01});
    std::vector<double> w{1.0};
    const std::vector<double> g{0.0};
    adamw_step(st, w, g, 0.1);
    EXPECT_NEAR(w[0], 0.999, 1e-12);
    EXPECT_EQ(st.step, 1u);
  }
  {
    OptimizerState st(1, {0.9, 0.999, 1e-8, 0.0});
    std::vector<double> w{0.0};
    const std::vector<double> g{1.0};
    adamw_step(st, w, g, 0.1);
    EXPECT_NEAR(w[0], -0.1, 1e-8);
  }
  {
    OptimizerState a(3, {}), b(3, {});
    std::vector<double> wa{1, 2, 3}, wb{1, 2, 3};
    const std::vector<double> g{0.5, -1, 2};
    adamw_step(a, wa, g, 0.01);
    adamw_step(b, wb, g, 0.01);
    EXPECT_EQ(wa, wb);
    EXPECT_EQ(a, b);
  }
  OptimizerState st(2, {});
  std::vector<double> w{1, 2};
  const std::vector<double> g{1};
  EXPECT_THROW(adamw_step(st, w, g, 0.1), Error);
}

TEST(Optimizer, CosineSchedule) {
  EXPECT_EQ(cosine_lr(0, 100, 1e-4, 5e-5), 1e-4);
  EXPECT_NEAR(cosine_lr(100, 100, 1e-4, 5e-5), 5e-5, 1e-20);
  EXPECT_NEAR(cosine_lr(50, 100, 1e-4, 5e-5), 7.5e-5, 1e-18);
  EXPECT_EQ(cosine_lr(150, 100, 1e-4, 5e-5), 5e-5);
  EXPECT_THROW(cosine_lr(0, 0, 1e-4, 5e-5), Error);
}

TEST(Model, CheckpointRoundTrip) {
  const fs::path dir = fs::temp_directory_path() / "concord_ckpt_test";
  fs::create_directories(dir);
  ModelShape s;
  s.input_points = 17;
  s.encoder_widths = {5, 7};
  s.decoder_widths = {9, 4};
  s.output_points = 3;
  const auto p = init_params(s, 8);
  save_checkpoint(p, dir / "a.bin");
  EXPECT_EQ(load_checkpoint(dir / "a.bin"), p);

  {
    std::ifstream is(dir / "a.bin", std::ios::binary);
    char magic[8];
    is.read(magic, 8);
    EXPECT_EQ(std::string(magic, 8), "CONCORD1");
  }
  const auto size = fs::file_size(dir / "a.bin");
  EXPECT_EQ(size, 8 + 8 * (3 + 1 + 2 + 1 + 2 + 1) + 8 * parameter_count(s));

  fs::copy_file(dir / "a.bin", dir / "b.bin", fs::copy_options::overwrite_existing);
  fs::resize_file(dir / "b.bin", size - 4);
  try {
    load_checkpoint(dir / "b.bin");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  std::ofstream(dir / "c.bin") << "NOTACKPT and more";
  EXPECT_THROW(load_checkpoint(dir / "c.bin"), Error);
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), Error);
  fs::remove_all(dir);
}

TEST(Train, SingleObjectSingleEpoch) {
  auto c = small_config();
  c.epochs = 1;
  const auto r = train(c, small_corpus(1, 32, 1));
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].epoch, 1u);
  EXPECT_TRUE(std::isfinite(r.history[0].train_loss));
  EXPECT_TRUE(std::isfinite(r.history[0].eval.cd_l2));
}

TEST(Train, DeterministicAndLearns) {
  auto c = small_config();
  c.epochs = 6;
  const auto data = small_corpus(12, 32, 2);
  const auto a = train(c, data);
  const auto b = train(c, data);
  EXPECT_EQ(a.params, b.params);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].eval.cd_l2, b.history[i].eval.cd_l2);
  }
  EXPECT_LT(a.history.back().train_loss, a.history.front().train_loss);
  c.seed = 2;
  EXPECT_NE(train(c, data).params, a.params);
}

TEST(Train, RejectsBadInput) {
  auto c = small_config();
  c.views = 1;
  try {
    train(c, small_corpus(3, 32, 3));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientViews);
  }
  c = small_config();
  auto data = small_corpus(3, 32, 3);
  data[1].points.pop_back();
  EXPECT_THROW(train(c, data), Error);
  EXPECT_THROW(train(c, {}), Error);
}

TEST(Train, DivergenceIsReported) {
  auto c = small_config();
  c.lr_max = c.lr_min = 1e300;
  try {
    train(c, small_corpus(4, 32, 4));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergence);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, EvaluatePerfectPredictor) {
  const auto data = small_corpus(3, 40, 5);
  // Looks the occlusion up by its incomplete cloud and returns the missing part.
  const Predictor oracle_pred = [&](const PointCloud& inc) {
    for (const auto& c : data)
      for (const auto& v : sample_view_set(c, 2, 0.5, 9))
        if (v.incomplete.points == inc.points) return v.missing;
    ADD_FAILURE();
    return inc;
  };
  const auto r = evaluate_predictor(oracle_pred, data, 0.5, 2, 9);
  EXPECT_EQ(r.mean.cd_l2, 0.0);
  EXPECT_EQ(r.mean.f1, 1.0);
  EXPECT_EQ(r.objects.size(), 3u);
}
