#include "concord/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "concord/metrics.hpp"
#include "concord/rng.hpp"
#include "concord/views.hpp"

namespace concord {

void TrainConfig::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (views < 1) fail("views must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) fail("ratio must lie in (0, 1)");
  if (!(lr_min > 0.0) || !(lr_max >= lr_min) || !std::isfinite(lr_max)) fail("need 0 < lr_min <= lr_max");
  if (!(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0) || !(optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0)) {
    fail("adam betas must lie in [0, 1)");
  }
  if (!(optimizer.eps > 0.0) || !(optimizer.weight_decay >= 0.0)) fail("eps must be > 0 and weight_decay >= 0");
  try {
    weights.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (weights.alpha > 0.0 && views < 2) {
    throw Error(ErrorCode::InsufficientViews, "alpha > 0 needs views >= 2");
  }
  if (encoder_widths.empty()) fail("encoder_widths must not be empty");
  if (!(eval_fraction >= 0.0 && eval_fraction < 1.0)) fail("eval_fraction must lie in [0, 1)");
  if (eval_views < 1) fail("eval_views must be >= 1");
}

void split_train_eval(std::size_t count, double eval_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& eval) {
  std::vector<std::size_t> ids(count);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  if (count < 2 || eval_fraction == 0.0) {
    train = ids;
    eval = ids;
    return;
  }
  Rng rng(derive_seed(seed, 0x73706c6974));
  rng.shuffle(ids);
  auto n_eval = static_cast<std::size_t>(std::floor(static_cast<double>(count) * eval_fraction + 0.5));
  n_eval = std::clamp<std::size_t>(n_eval, 1, count - 1);
  eval.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_eval));
  train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_eval), ids.end());
  std::sort(eval.begin(), eval.end());
  std::sort(train.begin(), train.end());
}

ModelShape resolve_shape(const TrainConfig& config, std::size_t cloud_points) {
  ModelShape shape;
  const std::size_t missing = missing_count(cloud_points, config.ratio);
  shape.output_points = config.output_points ? config.output_points : missing;
  shape.input_points = config.input_points ? config.input_points : cloud_points - missing;
  shape.encoder_widths = config.encoder_widths;
  shape.decoder_widths = config.decoder_widths;
  shape.validate();
  return shape;
}

Predictor model_predictor(const ModelParams& params) {
  return [params](const PointCloud& incomplete) { return forward(params, network_input(params.shape, incomplete)); };
}

EvalSummary evaluate_predictor(const Predictor& predictor, const std::vector<PointCloud>& clouds, double ratio,
                               std::size_t views, std::uint64_t seed) {
  if (clouds.empty()) throw Error(ErrorCode::EmptyCloud, "nothing to evaluate");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must lie in (0, 1)");
  EvalSummary out;
  out.objects.reserve(clouds.size());
  for (const auto& cloud : clouds) {
    ObjectEval obj{cloud.id, {}};
    for (const auto& view : sample_view_set(cloud, views, ratio, seed)) {
      const PointCloud completed = concat(predictor(view.incomplete), view.incomplete);
      const MetricSet m = all_metrics(completed, cloud);
      obj.metrics.cd_l2 += m.cd_l2;
      obj.metrics.cd_l1 += m.cd_l1;
      obj.metrics.da_cd += m.da_cd;
      obj.metrics.f1 += m.f1.f1;
    }
    const double inv = 1.0 / static_cast<double>(views);
    obj.metrics.cd_l2 *= inv;
    obj.metrics.cd_l1 *= inv;
    obj.metrics.da_cd *= inv;
    obj.metrics.f1 *= inv;
    out.mean.cd_l2 += obj.metrics.cd_l2;
    out.mean.cd_l1 += obj.metrics.cd_l1;
    out.mean.da_cd += obj.metrics.da_cd;
    out.mean.f1 += obj.metrics.f1;
    out.objects.push_back(std::move(obj));
  }
  const double inv = 1.0 / static_cast<double>(clouds.size());
  out.mean.cd_l2 *= inv;
  out.mean.cd_l1 *= inv;
  out.mean.da_cd *= inv;
  out.mean.f1 *= inv;
  return out;
}

TrainResult train(const TrainConfig& config, const std::vector<PointCloud>& dataset) {
  config.validate();
  if (dataset.empty()) throw Error(ErrorCode::EmptyCloud, "empty dataset");
  const std::size_t cloud_points = dataset.front().size();
  for (const auto& c : dataset) {
    if (c.size() != cloud_points) {
      throw Error(ErrorCode::ShapeMismatch, "all clouds must have the same point count; resample first");
    }
    for (const auto& p : c.points) {
      if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
        throw Error(ErrorCode::InvalidCoordinate, "non-finite coordinate in " + c.id);
      }
    }
  }

  TrainResult result;
  split_train_eval(dataset.size(), config.eval_fraction, config.seed, result.train_ids, result.eval_ids);
  std::vector<PointCloud> eval_set;
  for (auto i : result.eval_ids) eval_set.push_back(dataset[i]);
  std::vector<PointCloud> train_probe;
  for (std::size_t k = 0; k < result.train_ids.size() && k < config.train_eval_objects; ++k) {
    train_probe.push_back(dataset[result.train_ids[k]]);
  }

  const ModelShape shape = resolve_shape(config, cloud_points);
  result.params = init_params(shape, config.seed);
  OptimizerState opt(result.params.values.size(), config.optimizer);

  const std::size_t steps_per_epoch = (result.train_ids.size() + config.batch_size - 1) / config.batch_size;
  const std::uint64_t total_steps = config.epochs * steps_per_epoch;
  std::uint64_t step = 0;
  std::vector<double> grads(result.params.values.size());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> order = result.train_ids;
    Rng rng(derive_seed(config.seed, 0x6f72646572, epoch));
    rng.shuffle(order);
    const std::uint64_t view_seed =
        config.fixed_views ? config.eval_seed : derive_seed(config.seed, 0x76696577, epoch);

    double loss_sum = 0.0;
    double elapsed_ms = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::fill(grads.begin(), grads.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const PointCloud& cloud = dataset[order[k]];
        CompletionSample sample{cloud, sample_view_set(cloud, config.views, config.ratio, view_seed), {}};
        BackwardResult br;
        try {
          br = backward(result.params, sample, config.weights);
        } catch (const Error& e) {
          // Inputs were checked up front, so a bad coordinate here is an overflowing prediction.
          if (e.code() != ErrorCode::InvalidCoordinate) throw;
          throw Error(ErrorCode::Divergence, "non-finite prediction at epoch " + std::to_string(epoch) + ", step " +
                                                 std::to_string(step));
        }
        batch_loss += br.loss;
        for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += br.grads[i];
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      batch_loss *= inv;
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::Divergence, "non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                               std::to_string(step));
      }
      for (auto& g : grads) g *= inv;
      adamw_step(opt, result.params.values, grads, cosine_lr(step, total_steps, config.lr_max, config.lr_min));
      for (double v : result.params.values) {
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::Divergence, "non-finite weights after epoch " + std::to_string(epoch) + ", step " +
                                                 std::to_string(step));
        }
      }
      ++step;
      loss_sum += batch_loss;
      if (config.record_timing) {
        elapsed_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    if (config.record_timing) rec.ms_per_step = elapsed_ms / static_cast<double>(steps_per_epoch);
    const Predictor predictor = model_predictor(result.params);
    try {
      rec.eval = evaluate_predictor(predictor, eval_set, config.ratio, config.eval_views, config.eval_seed).mean;
      if (!train_probe.empty()) {
        rec.train = evaluate_predictor(predictor, train_probe, config.ratio, config.eval_views, config.eval_seed).mean;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidCoordinate) throw;
      throw Error(ErrorCode::Divergence, "non-finite prediction while evaluating epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace concord
