#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "concord/losses.hpp"
#include "concord/model.hpp"
#include "concord/optimizer.hpp"

namespace concord {

struct TrainConfig {
  std::size_t epochs = 80;
  std::size_t batch_size = 16;  // objects per step
  std::size_t views = 3;        // occlusions per object per step
  double ratio = 0.75;          // missing fraction during training and evaluation
  double lr_max = 1e-4;
  double lr_min = 5e-5;
  AdamWHyper optimizer;
  LossWeights weights;
  std::uint64_t seed = 1;
  // 0 = derive from the dataset: output = missing count, input = the rest.
  std::size_t input_points = 0;
  std::size_t output_points = 0;
  std::vector<std::size_t> encoder_widths{64, 128};
  std::vector<std::size_t> decoder_widths{256};
  double eval_fraction = 0.2;
  std::size_t eval_views = 2;
  std::uint64_t eval_seed = 7;
  std::size_t train_eval_objects = 32;  // training objects scored per epoch
  bool record_timing = false;
  // Train on the evaluation occlusions (eval_seed) every epoch instead of
  // redrawing them. The toy-set experiment needs this.
  bool fixed_views = false;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EvalMetrics {
  double cd_l2 = 0.0;
  double cd_l1 = 0.0;
  double da_cd = 0.0;
  double f1 = 0.0;

  friend bool operator==(const EvalMetrics&, const EvalMetrics&) = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  EvalMetrics train;
  EvalMetrics eval;
  double ms_per_step = 0.0;  // 0 unless record_timing
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> eval_ids;
};

// Deterministic train/held-out partition of `count` objects. A single object
// is used for both.
void split_train_eval(std::size_t count, double eval_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& eval);

ModelShape resolve_shape(const TrainConfig& config, std::size_t cloud_points);

/// Trains the completion network on complete clouds, redrawing the views of
/// every object each epoch. Throws Divergence on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::vector<PointCloud>& dataset);

using Predictor = std::function<PointCloud(const PointCloud& incomplete)>;

struct ObjectEval {
  std::string id;
  EvalMetrics metrics;
};

struct EvalSummary {
  std::vector<ObjectEval> objects;  // averaged over that object's views
  EvalMetrics mean;
};

/// Scores completions (prediction joined with its incomplete input) against
/// the complete cloud over `views` fixed occlusions per object.
EvalSummary evaluate_predictor(const Predictor& predictor, const std::vector<PointCloud>& clouds, double ratio,
                               std::size_t views, std::uint64_t seed);

Predictor model_predictor(const ModelParams& params);

}  // namespace concord
