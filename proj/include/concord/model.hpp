#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "concord/losses.hpp"
#include "concord/point_cloud.hpp"

namespace concord {

/// Architecture of the completion network: a shared per-point MLP
/// (3 -> encoder_widths..., rectified) max-pooled into a latent code, then a
/// decoder MLP (latent -> decoder_widths..., rectified -> 3 * output_points,
/// linear) read out as output_points predicted missing points.
struct ModelShape {
  std::size_t input_points = 32;
  std::vector<std::size_t> encoder_widths{64, 128};
  std::vector<std::size_t> decoder_widths{256};
  std::size_t output_points = 96;

  std::size_t latent_dim() const { return encoder_widths.back(); }
  void validate() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

struct LayerLayout {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // out x in, row-major
  std::size_t bias_offset = 0;
};

// Encoder layers first, then decoder layers; each stores weights then biases.
std::vector<LayerLayout> layer_layouts(const ModelShape& shape);
std::size_t parameter_count(const ModelShape& shape);

struct ModelParams {
  ModelShape shape;
  std::vector<double> values;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
ModelParams init_params(const ModelShape& shape, std::uint64_t seed);
ModelParams zero_params(const ModelShape& shape);

/// Predicts shape.output_points missing points. The input must already hold
/// exactly shape.input_points points.
PointCloud forward(const ModelParams& params, const PointCloud& incomplete);

// Everything backward needs from one forward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> encoder_acts;  // per layer, points x width (post-rectifier)
  std::vector<std::size_t> argmax;                // per latent channel, winning point (lowest id on ties)
  std::vector<std::vector<double>> decoder_acts;  // [0] = latent, then per layer output (last is linear)
  PointCloud output;
};

ForwardTrace forward_traced(const ModelParams& params, const PointCloud& incomplete);

// Adds d loss / d params for one view into `grads`, given d loss / d output.
void backpropagate(const ModelParams& params, const PointCloud& incomplete, const ForwardTrace& trace,
                   std::span<const Point3> d_output, std::span<double> grads);

/// Network input for a raw incomplete cloud (FPS or padding to input_points).
PointCloud network_input(const ModelShape& shape, const PointCloud& incomplete);

/// Runs the network on every view of `sample` and stores the predictions.
void predict_views(const ModelParams& params, CompletionSample& sample);

struct BackwardResult {
  double loss = 0.0;
  std::vector<double> grads;
};

/// Gradient of total_loss w.r.t. every parameter, with nearest-neighbor
/// assignments frozen. Predictions are recomputed from `params`; any already
/// present in the sample are ignored.
BackwardResult backward(const ModelParams& params, const CompletionSample& sample, const LossWeights& w);

// Checkpoint: "CONCORD1", then little-endian u64 fields
//   input_points, output_points, latent_dim,
//   encoder width count, encoder widths..., decoder width count, decoder widths...,
//   parameter count,
// then every parameter as little-endian IEEE-754 binary64 in layout order.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace concord
