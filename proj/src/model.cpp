#include "concord/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "concord/rng.hpp"
#include "concord/views.hpp"

namespace concord {

namespace {

// W is out x in row-major; returns in x out so affine() runs as axpy sweeps.
std::vector<double> transpose(const double* w, std::size_t n_in, std::size_t n_out) {
  std::vector<double> t(n_in * n_out);
  for (std::size_t o = 0; o < n_out; ++o) {
    for (std::size_t i = 0; i < n_in; ++i) t[i * n_out + o] = w[o * n_in + i];
  }
  return t;
}

// out[o] = b[o] + sum_i W[o, i] * in[i], summed in ascending i.
inline void affine(const double* wt, const double* b, const double* in, double* out, std::size_t n_in,
                   std::size_t n_out) {
  for (std::size_t o = 0; o < n_out; ++o) out[o] = b[o];
  for (std::size_t i = 0; i < n_in; ++i) {
    const double x = in[i];
    if (x == 0.0) continue;
    const double* row = wt + i * n_out;
    for (std::size_t o = 0; o < n_out; ++o) out[o] += x * row[o];
  }
}

inline void rectify(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = v[i] > 0.0 ? v[i] : 0.0;
}

void check_input(const ModelShape& shape, const PointCloud& incomplete) {
  if (incomplete.size() != shape.input_points) {
    throw Error(ErrorCode::ShapeMismatch, "network expects " + std::to_string(shape.input_points) + " points, got " +
                                              std::to_string(incomplete.size()));
  }
}

void check_params(const ModelParams& p) {
  if (p.values.size() != parameter_count(p.shape)) {
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match the architecture");
  }
}

}  // namespace

void ModelShape::validate() const {
  if (input_points < 1 || output_points < 1 || encoder_widths.empty()) {
    throw Error(ErrorCode::InvalidArgument, "model needs input/output points and at least one encoder layer");
  }
  for (auto w : encoder_widths) {
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "layer widths must be >= 1");
  }
  for (auto w : decoder_widths) {
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "layer widths must be >= 1");
  }
}

std::vector<LayerLayout> layer_layouts(const ModelShape& shape) {
  std::vector<LayerLayout> out;
  std::size_t offset = 0;
  const auto push = [&](std::size_t in, std::size_t n_out) {
    LayerLayout l{in, n_out, offset, offset + in * n_out};
    offset = l.bias_offset + n_out;
    out.push_back(l);
  };
  std::size_t width = 3;
  for (auto w : shape.encoder_widths) {
    push(width, w);
    width = w;
  }
  for (auto w : shape.decoder_widths) {
    push(width, w);
    width = w;
  }
  push(width, 3 * shape.output_points);
  return out;
}

std::size_t parameter_count(const ModelShape& shape) {
  const auto layouts = layer_layouts(shape);
  return layouts.back().bias_offset + layouts.back().out;
}

ModelParams zero_params(const ModelShape& shape) {
  shape.validate();
  return {shape, std::vector<double>(parameter_count(shape), 0.0)};
}

ModelParams init_params(const ModelShape& shape, std::uint64_t seed) {
  ModelParams p = zero_params(shape);
  Rng rng(derive_seed(seed, 0x696e6974));
  for (const auto& l : layer_layouts(shape)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.in * l.out; ++i) p.values[l.weight_offset + i] = rng.uniform(-bound, bound);
  }
  return p;
}

ForwardTrace forward_traced(const ModelParams& params, const PointCloud& incomplete) {
  check_params(params);
  const ModelShape& shape = params.shape;
  check_input(shape, incomplete);
  const auto layouts = layer_layouts(shape);
  const double* v = params.values.data();
  const std::size_t n = incomplete.size();
  const std::size_t enc = shape.encoder_widths.size();

  ForwardTrace t;
  t.encoder_acts.resize(enc);
  for (std::size_t l = 0; l < enc; ++l) {
    const auto& L = layouts[l];
    auto& acts = t.encoder_acts[l];
    acts.resize(n * L.out);
    const auto wt = transpose(v + L.weight_offset, L.in, L.out);
    for (std::size_t p = 0; p < n; ++p) {
      const double* in = l == 0 ? incomplete[p].data() : t.encoder_acts[l - 1].data() + p * L.in;
      double* out = acts.data() + p * L.out;
      affine(wt.data(), v + L.bias_offset, in, out, L.in, L.out);
      rectify(out, L.out);
    }
  }

  const std::size_t latent = shape.latent_dim();
  const auto& last = t.encoder_acts.back();
  t.argmax.assign(latent, 0);
  t.decoder_acts.resize(layouts.size() - enc + 1);
  auto& code = t.decoder_acts[0];
  code.assign(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(latent));
  for (std::size_t p = 1; p < n; ++p) {
    const double* row = last.data() + p * latent;
    for (std::size_t c = 0; c < latent; ++c) {
      if (row[c] > code[c]) {
        code[c] = row[c];
        t.argmax[c] = p;
      }
    }
  }

  for (std::size_t l = enc; l < layouts.size(); ++l) {
    const auto& L = layouts[l];
    auto& out = t.decoder_acts[l - enc + 1];
    out.resize(L.out);
    const double* in = t.decoder_acts[l - enc].data();
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* row = v + L.weight_offset + o * L.in;
      double acc = 0.0;
      for (std::size_t i = 0; i < L.in; ++i) acc += row[i] * in[i];
      out[o] = v[L.bias_offset + o] + acc;
    }
    if (l + 1 < layouts.size()) rectify(out.data(), L.out);
  }

  const auto& flat = t.decoder_acts.back();
  t.output.points.resize(shape.output_points);
  for (std::size_t i = 0; i < shape.output_points; ++i) {
    t.output.points[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
  }
  return t;
}

PointCloud forward(const ModelParams& params, const PointCloud& incomplete) {
  return forward_traced(params, incomplete).output;
}

void backpropagate(const ModelParams& params, const PointCloud& incomplete, const ForwardTrace& trace,
                   std::span<const Point3> d_output, std::span<double> grads) {
  const ModelShape& shape = params.shape;
  if (d_output.size() != shape.output_points || grads.size() != params.values.size()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient buffers do not match the architecture");
  }
  const auto layouts = layer_layouts(shape);
  const double* v = params.values.data();
  const std::size_t enc = shape.encoder_widths.size();

  // Decoder, last layer first. `delta` is d loss / d pre-activation.
  std::vector<double> delta(3 * shape.output_points);
  for (std::size_t i = 0; i < shape.output_points; ++i) {
    for (int a = 0; a < 3; ++a) delta[3 * i + a] = d_output[i][a];
  }
  for (std::size_t l = layouts.size(); l-- > enc;) {
    const auto& L = layouts[l];
    const auto& in = trace.decoder_acts[l - enc];
    double* gw = grads.data() + L.weight_offset;
    double* gb = grads.data() + L.bias_offset;
    std::vector<double> d_in(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      gb[o] += d;
      double* grow = gw + o * L.in;
      const double* wrow = v + L.weight_offset + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) {
        grow[i] += d * in[i];
        d_in[i] += d * wrow[i];
      }
    }
    // The layer input is rectified unless it is the latent code, whose
    // rectifier belongs to the last encoder layer and is handled there.
    if (l > enc) {
      for (std::size_t i = 0; i < L.in; ++i) {
        if (!(in[i] > 0.0)) d_in[i] = 0.0;
      }
    }
    delta = std::move(d_in);
  }

  // Max pool routes each latent channel to its winning point.
  const std::size_t n = incomplete.size();
  std::vector<double> d_acts(n * shape.latent_dim(), 0.0);
  for (std::size_t c = 0; c < shape.latent_dim(); ++c) d_acts[trace.argmax[c] * shape.latent_dim() + c] = delta[c];

  for (std::size_t l = enc; l-- > 0;) {
    const auto& L = layouts[l];
    const auto& out = trace.encoder_acts[l];
    double* gw = grads.data() + L.weight_offset;
    double* gb = grads.data() + L.bias_offset;
    std::vector<double> d_prev(l > 0 ? n * L.in : 0, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const double* in = l == 0 ? incomplete[p].data() : trace.encoder_acts[l - 1].data() + p * L.in;
      for (std::size_t o = 0; o < L.out; ++o) {
        if (!(out[p * L.out + o] > 0.0)) continue;
        const double d = d_acts[p * L.out + o];
        if (d == 0.0) continue;
        gb[o] += d;
        double* grow = gw + o * L.in;
        const double* wrow = v + L.weight_offset + o * L.in;
        for (std::size_t i = 0; i < L.in; ++i) grow[i] += d * in[i];
        if (l > 0) {
          double* dp = d_prev.data() + p * L.in;
          for (std::size_t i = 0; i < L.in; ++i) dp[i] += d * wrow[i];
        }
      }
    }
    d_acts = std::move(d_prev);
  }
}

PointCloud network_input(const ModelShape& shape, const PointCloud& incomplete) {
  return resample(incomplete, shape.input_points);
}

void predict_views(const ModelParams& params, CompletionSample& sample) {
  sample.predictions.clear();
  sample.predictions.reserve(sample.views.size());
  for (const auto& view : sample.views) {
    sample.predictions.push_back(forward(params, network_input(params.shape, view.incomplete)));
  }
}

BackwardResult backward(const ModelParams& params, const CompletionSample& sample, const LossWeights& w) {
  check_params(params);
  CompletionSample run{sample.gt_complete, sample.views, {}};
  std::vector<PointCloud> inputs;
  std::vector<ForwardTrace> traces;
  inputs.reserve(run.views.size());
  traces.reserve(run.views.size());
  for (const auto& view : run.views) {
    inputs.push_back(network_input(params.shape, view.incomplete));
    traces.push_back(forward_traced(params, inputs.back()));
    run.predictions.push_back(traces.back().output);
  }
  const LossGradient lg = loss_gradient(run, w);
  BackwardResult out;
  out.loss = lg.loss;
  out.grads.assign(params.values.size(), 0.0);
  for (std::size_t i = 0; i < run.views.size(); ++i) {
    backpropagate(params, inputs[i], traces[i], lg.d_predictions[i], out.grads);
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'C', 'O', 'N', 'C', 'O', 'R', 'D', '1'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

void write_u64(std::ostream& os, std::uint64_t x) {
  x = to_little(x);
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t x = 0;
  if (!is.read(reinterpret_cast<char*>(&x), sizeof x)) throw Error(ErrorCode::IoError, "truncated checkpoint");
  return to_little(x);
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  check_params(params);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  const auto& s = params.shape;
  os.write(kMagic, sizeof kMagic);
  write_u64(os, s.input_points);
  write_u64(os, s.output_points);
  write_u64(os, s.latent_dim());
  write_u64(os, s.encoder_widths.size());
  for (auto w : s.encoder_widths) write_u64(os, w);
  write_u64(os, s.decoder_widths.size());
  for (auto w : s.decoder_widths) write_u64(os, w);
  write_u64(os, params.values.size());
  for (double d : params.values) write_u64(os, std::bit_cast<std::uint64_t>(d));
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a checkpoint");
  }
  constexpr std::uint64_t kSane = 1u << 24;
  const auto bounded = [&](std::uint64_t x) {
    if (x > kSane) throw Error(ErrorCode::IoError, "implausible checkpoint header");
    return static_cast<std::size_t>(x);
  };
  ModelShape s;
  s.input_points = bounded(read_u64(is));
  s.output_points = bounded(read_u64(is));
  const std::size_t latent = bounded(read_u64(is));
  s.encoder_widths.resize(bounded(read_u64(is)));
  for (auto& w : s.encoder_widths) w = bounded(read_u64(is));
  s.decoder_widths.resize(bounded(read_u64(is)));
  for (auto& w : s.decoder_widths) w = bounded(read_u64(is));
  s.validate();
  if (latent != s.latent_dim()) throw Error(ErrorCode::IoError, "latent width disagrees with encoder widths");
  const std::size_t count = bounded(read_u64(is));
  if (count != parameter_count(s)) throw Error(ErrorCode::IoError, "parameter count disagrees with architecture");
  ModelParams p{s, std::vector<double>(count)};
  for (auto& d : p.values) d = std::bit_cast<double>(read_u64(is));
  return p;
}

}  // namespace concord
