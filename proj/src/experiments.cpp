#include "concord/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "concord/dataset_io.hpp"
#include "concord/error.hpp"
#include "concord/metrics_csv.hpp"
#include "concord/model.hpp"
#include "concord/rng.hpp"
#include "concord/toyset.hpp"

namespace concord {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

// Labels a run by its loss setup so identical configs give identical CSVs
// wherever they are written.
std::string run_label(const TrainConfig& c) {
  return "a" + format_double(c.weights.alpha) + "_b" + format_double(c.weights.beta) + "_d" +
         format_double(c.weights.delta) + "_n" + std::to_string(c.views) + "_s" + std::to_string(c.seed);
}

std::string cell_dir(double alpha, double beta) { return "a" + format_double(alpha) + "_b" + format_double(beta); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(seeds[i]);
  }
  return out;
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Train: return "train";
    case ExperimentKind::Eval: return "eval";
    case ExperimentKind::AblationAlphaBeta: return "ablation-alphabeta";
    case ExperimentKind::AblationN: return "ablation-n";
    case ExperimentKind::ToysetAB: return "toyset-AB";
  }
  return "train";
}

ExperimentKind parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::Train, ExperimentKind::Eval, ExperimentKind::AblationAlphaBeta,
                 ExperimentKind::AblationN, ExperimentKind::ToysetAB}) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::IoError, "unknown experiment kind '" + name + "'");
}

std::string manifest_to_json(const ExperimentManifest& m) {
  nlohmann::json j;
  j["kind"] = kind_name(m.kind);
  j["config"] = serialize_config(m.config);
  j["seeds"] = m.seeds;
  j["outputs"] = m.outputs;
  j["inputs"] = m.inputs;
  return j.dump(2) + "\n";
}

ExperimentManifest manifest_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentManifest m;
    m.kind = parse_kind(j.at("kind").get<std::string>());
    m.config = parse_config(j.at("config").get<std::string>(), "manifest config");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("bad manifest: ") + e.what());
  }
}

void write_manifest(const ExperimentManifest& m, const fs::path& dir) {
  fs::create_directories(dir);
  auto out = open_out(dir / kManifestFile);
  out << manifest_to_json(m);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + dir.string());
}

ExperimentManifest read_manifest(const fs::path& dir) {
  std::ifstream in(dir / kManifestFile);
  if (!in) throw Error(ErrorCode::IoError, "no manifest in " + dir.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

std::size_t resolve_jobs(std::size_t requested) {
  std::size_t jobs = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONCORD_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) jobs = std::min(jobs, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, jobs);
}

void run_parallel(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(jobs, count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

TrainOutcome run_training(const RunConfig& config, const std::vector<PointCloud>& dataset, const fs::path& out,
                          const std::string& run_id, const std::map<std::string, std::string>& inputs) {
  config.validate();
  ExperimentManifest manifest;
  manifest.kind = ExperimentKind::Train;
  manifest.config = config;
  manifest.seeds = {config.train.seed};
  manifest.outputs = {{"checkpoint", "checkpoint.bin"},
                      {"metrics", "metrics.csv"},
                      {"train_loss", "train_loss.csv"},
                      {"config", "config.cfg"}};
  manifest.inputs = inputs;
  write_manifest(manifest, out);
  open_out(out / "config.cfg") << serialize_config(config);

  TrainOutcome outcome;
  outcome.dir = out;
  outcome.result = train(config.train, dataset);
  const auto& history = outcome.result.history;
  save_checkpoint(outcome.result.params, out / "checkpoint.bin");
  write_metrics_csv(records_from_history(run_id, history), out / "metrics.csv");
  {
    auto loss = open_out(out / "train_loss.csv");
    loss << "run,epoch,train_loss\n";
    for (const auto& h : history) loss << run_id << ',' << h.epoch << ',' << format_double(h.train_loss) << '\n';
  }
  outcome.final_eval_cd = history.back().eval.cd_l2;
  double ms = 0.0;
  for (const auto& h : history) ms += h.ms_per_step;
  outcome.mean_ms_per_step = ms / static_cast<double>(history.size());
  return outcome;
}

TrainOutcome cmd_train(const RunConfig& config, const fs::path& data, const fs::path& out) {
  config.validate();
  const auto dataset = load_dataset(data);
  return run_training(config, dataset, out, run_label(config.train), {{"data", data.string()}});
}

std::vector<RatioEval> cmd_eval(const fs::path& checkpoint, const fs::path& data, const std::vector<double>& ratios,
                                const fs::path& out, std::size_t views, std::uint64_t seed) {
  if (ratios.empty()) throw Error(ErrorCode::InvalidArgument, "no evaluation ratio given");
  for (double r : ratios) {
    if (!(r > 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio " + format_double(r) + " outside (0, 1)");
  }
  if (views < 1) throw Error(ErrorCode::InvalidArgument, "views must be >= 1");
  const ModelParams params = load_checkpoint(checkpoint);
  const auto dataset = load_dataset(data);

  ExperimentManifest manifest;
  manifest.kind = ExperimentKind::Eval;
  manifest.config.eval_ratios = ratios;
  manifest.config.train.eval_views = views;
  manifest.config.train.eval_seed = seed;
  manifest.seeds = {seed};
  manifest.outputs = {{"objects", "objects.csv"}, {"metrics", "metrics.csv"}};
  manifest.inputs = {{"checkpoint", checkpoint.string()}, {"data", data.string()}};
  write_manifest(manifest, out);

  const Predictor predictor = model_predictor(params);
  std::vector<RatioEval> results;
  for (double r : ratios) results.push_back({r, evaluate_predictor(predictor, dataset, r, views, seed)});

  auto objects = open_out(out / "objects.csv");
  objects << "object,ratio,cd_l2,cd_l1,da_cd,f1_1pct\n";
  std::vector<MetricRecord> records;
  EvalMetrics avg;
  for (const auto& re : results) {
    for (const auto& o : re.summary.objects) {
      objects << o.id << ',' << format_double(re.ratio) << ',' << format_double(o.metrics.cd_l2) << ','
              << format_double(o.metrics.cd_l1) << ',' << format_double(o.metrics.da_cd) << ','
              << format_double(o.metrics.f1) << '\n';
    }
    records.push_back({"ratio=" + format_double(re.ratio), 0, "eval", re.summary.mean, 0.0});
    avg.cd_l2 += re.summary.mean.cd_l2;
    avg.cd_l1 += re.summary.mean.cd_l1;
    avg.da_cd += re.summary.mean.da_cd;
    avg.f1 += re.summary.mean.f1;
  }
  const double inv = 1.0 / static_cast<double>(results.size());
  avg.cd_l2 *= inv;
  avg.cd_l1 *= inv;
  avg.da_cd *= inv;
  avg.f1 *= inv;
  records.push_back({"avg", 0, "eval", avg, 0.0});
  write_metrics_csv(records, out / "metrics.csv");
  return results;
}

double median(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::InvalidArgument, "median of nothing");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<std::pair<double, double>> default_alpha_beta_grid() {
  return {{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}, {0.1, 1.0}};
}

std::vector<AlphaBetaCell> cmd_ablation_alphabeta(const RunConfig& config, const std::vector<PointCloud>& dataset,
                                                  const std::vector<std::pair<double, double>>& grid,
                                                  const fs::path& out, std::size_t jobs) {
  if (grid.empty()) throw Error(ErrorCode::ConfigError, "empty alpha/beta grid");
  config.validate();
  const auto& seeds = config.seeds;
  std::vector<RunConfig> tasks;
  for (const auto& [alpha, beta] : grid) {
    for (auto seed : seeds) {
      RunConfig c = config;
      c.train.weights.alpha = alpha;
      c.train.weights.beta = beta;
      c.train.seed = seed;
      c.validate();
      tasks.push_back(c);
    }
  }

  ExperimentManifest manifest;
  manifest.kind = ExperimentKind::AblationAlphaBeta;
  manifest.config = config;
  manifest.seeds = seeds;
  manifest.outputs = {{"summary", "summary.csv"}, {"runs", "runs.csv"}, {"cells", "cells"}};
  write_manifest(manifest, out);

  std::vector<TrainOutcome> outcomes(tasks.size());
  run_parallel(tasks.size(), jobs, [&](std::size_t i) {
    const auto& t = tasks[i].train;
    const fs::path dir = out / "cells" / cell_dir(t.weights.alpha, t.weights.beta) / ("s" + std::to_string(t.seed));
    outcomes[i] = run_training(tasks[i], dataset, dir, run_label(t));
  });

  std::vector<AlphaBetaCell> cells;
  auto runs = open_out(out / "runs.csv");
  runs << "alpha,beta,seed,final_eval_cd_l2,final_train_loss\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    AlphaBetaCell cell{grid[g].first, grid[g].second, {}, 0.0};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& o = outcomes[g * seeds.size() + s];
      cell.final_eval_cd.push_back(o.final_eval_cd);
      runs << format_double(cell.alpha) << ',' << format_double(cell.beta) << ',' << seeds[s] << ','
           << format_double(o.final_eval_cd) << ',' << format_double(o.result.history.back().train_loss) << '\n';
    }
    cell.median_cd = median(cell.final_eval_cd);
    cells.push_back(cell);
  }
  auto summary = open_out(out / "summary.csv");
  summary << "alpha,beta,median_cd_l2,mean_cd_l2,seeds\n";
  for (const auto& c : cells) {
    summary << format_double(c.alpha) << ',' << format_double(c.beta) << ',' << format_double(c.median_cd) << ','
            << format_double(mean_of(c.final_eval_cd)) << ',' << join_seeds(seeds) << '\n';
  }
  return cells;
}

std::vector<NCell> cmd_ablation_n(const RunConfig& config, const std::vector<PointCloud>& dataset,
                                  const fs::path& out, std::size_t jobs) {
  config.validate();
  const auto& seeds = config.seeds;
  std::vector<RunConfig> tasks;
  for (std::size_t n : config.n_list) {
    for (auto seed : seeds) {
      RunConfig c = config;
      c.train.views = n;
      c.train.batch_size = std::max<std::size_t>(1, config.step_budget / n);
      c.train.seed = seed;
      c.train.record_timing = true;
      c.validate();
      tasks.push_back(c);
    }
  }

  ExperimentManifest manifest;
  manifest.kind = ExperimentKind::AblationN;
  manifest.config = config;
  manifest.seeds = seeds;
  manifest.outputs = {{"summary", "summary.csv"}, {"runs", "runs.csv"}, {"cells", "cells"}};
  write_manifest(manifest, out);

  std::vector<TrainOutcome> outcomes(tasks.size());
  run_parallel(tasks.size(), jobs, [&](std::size_t i) {
    const auto& t = tasks[i].train;
    const fs::path dir = out / "cells" / ("n" + std::to_string(t.views)) / ("s" + std::to_string(t.seed));
    outcomes[i] = run_training(tasks[i], dataset, dir, run_label(t));
  });

  std::vector<NCell> cells;
  auto runs = open_out(out / "runs.csv");
  runs << "n,batch_objects,seed,final_eval_cd_l2,ms_per_step\n";
  for (std::size_t k = 0; k < config.n_list.size(); ++k) {
    NCell cell;
    cell.n = config.n_list[k];
    cell.batch_objects = tasks[k * seeds.size()].train.batch_size;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& o = outcomes[k * seeds.size() + s];
      cell.final_eval_cd.push_back(o.final_eval_cd);
      cell.ms_per_step.push_back(o.mean_ms_per_step);
      runs << cell.n << ',' << cell.batch_objects << ',' << seeds[s] << ',' << format_double(o.final_eval_cd) << ','
           << format_double(o.mean_ms_per_step) << '\n';
    }
    cell.median_cd = median(cell.final_eval_cd);
    cell.mean_ms = mean_of(cell.ms_per_step);
    cells.push_back(cell);
  }
  auto summary = open_out(out / "summary.csv");
  summary << "n,batch_objects,median_cd_l2,mean_cd_l2,mean_ms_per_step\n";
  for (const auto& c : cells) {
    summary << c.n << ',' << c.batch_objects << ',' << format_double(c.median_cd) << ','
            << format_double(mean_of(c.final_eval_cd)) << ',' << format_double(c.mean_ms) << '\n';
  }
  return cells;
}

std::vector<ToysetArm> cmd_toyset(const RunConfig& config, const std::vector<PointCloud>& corpus, const fs::path& out,
                                  std::size_t jobs) {
  config.validate();
  ExperimentManifest manifest;
  manifest.kind = ExperimentKind::ToysetAB;
  manifest.config = config;
  for (std::size_t r = 0; r < config.toy_replicas; ++r) manifest.seeds.push_back(config.train.seed + r);
  manifest.outputs = {{"summary", "summary.csv"}, {"runs", "runs.csv"}, {"members", "members.csv"}, {"arms", "arms"}};
  write_manifest(manifest, out);

  // Mining and training share the occlusions drawn with eval_seed. Each
  // replica mines its own D^A and draws its own D^B with the replica seed.
  const auto splits = canonical_splits(corpus, config.train.ratio, config.train.eval_seed);
  std::vector<ToysetArm> arms(2);
  arms[0].name = "DA";
  arms[1].name = "DB";
  for (auto seed : manifest.seeds) {
    arms[0].members.push_back(mine_adversarial_subset(splits, config.toy, seed).members);
    arms[1].members.push_back(sample_uniform_subset(corpus.size(), config.toy.n, derive_seed(seed, 0x4442)));
  }
  std::vector<std::vector<NeighborGroupStats>> stats(2);
  for (std::size_t a = 0; a < 2; ++a) {
    for (const auto& members : arms[a].members) {
      stats[a].push_back(neighbor_group_stats(splits, members, config.toy.k2));
      arms[a].mean_incomplete_cd += stats[a].back().mean_incomplete_cd / static_cast<double>(manifest.seeds.size());
      arms[a].mean_missing_cd += stats[a].back().mean_missing_cd / static_cast<double>(manifest.seeds.size());
    }
  }
  {
    auto members = open_out(out / "members.csv");
    members << "dataset,seed,index,id\n";
    for (const auto& arm : arms) {
      for (std::size_t r = 0; r < arm.members.size(); ++r) {
        for (auto i : arm.members[r]) {
          members << arm.name << ',' << manifest.seeds[r] << ',' << i << ',' << corpus[i].id << '\n';
        }
      }
    }
  }
  for (std::size_t r = 0; r < manifest.seeds.size(); ++r) {
    const auto& da = stats[0][r];
    const auto& db = stats[1][r];
    if (!(da.mean_incomplete_cd < db.mean_incomplete_cd && da.mean_missing_cd > db.mean_missing_cd)) {
      throw Error(ErrorCode::InsufficientCorpus,
                  "mined set for seed " + std::to_string(manifest.seeds[r]) + " fails the statistic gate (incomplete CD " +
                      format_double(da.mean_incomplete_cd) + " vs " + format_double(db.mean_incomplete_cd) +
                      ", missing CD " + format_double(da.mean_missing_cd) + " vs " + format_double(db.mean_missing_cd) +
                      ")");
    }
  }

  struct Task {
    std::size_t arm;
    std::size_t replica;
    RunConfig config;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    for (std::size_t r = 0; r < manifest.seeds.size(); ++r) {
      RunConfig c = config;
      c.train.seed = manifest.seeds[r];
      c.train.fixed_views = true;
      c.train.eval_views = 1;
      c.validate();
      tasks.push_back({a, r, c});
    }
  }
  std::vector<TrainOutcome> outcomes(tasks.size());
  run_parallel(tasks.size(), jobs, [&](std::size_t i) {
    const auto& arm = arms[tasks[i].arm];
    std::vector<PointCloud> data;
    for (auto m : arm.members[tasks[i].replica]) data.push_back(corpus[m]);
    const auto& t = tasks[i].config.train;
    const fs::path dir = out / "arms" / arm.name / ("s" + std::to_string(t.seed));
    outcomes[i] = run_training(tasks[i].config, data, dir, arm.name + "_" + run_label(t));
  });

  auto runs = open_out(out / "runs.csv");
  runs << "dataset,seed,final_eval_cd_l2\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto& arm = arms[tasks[i].arm];
    arm.final_eval_cd.push_back(outcomes[i].final_eval_cd);
    runs << arm.name << ',' << tasks[i].config.train.seed << ',' << format_double(outcomes[i].final_eval_cd) << '\n';
  }
  auto summary = open_out(out / "summary.csv");
  summary << "dataset,size,mean_incomplete_cd,mean_missing_cd,mean_cd_l2,std_cd_l2,replicas\n";
  for (auto& arm : arms) {
    arm.mean_cd = mean_of(arm.final_eval_cd);
    arm.std_cd = sample_std(arm.final_eval_cd);
    summary << arm.name << ',' << config.toy.n << ',' << format_double(arm.mean_incomplete_cd) << ','
            << format_double(arm.mean_missing_cd) << ',' << format_double(arm.mean_cd) << ','
            << format_double(arm.std_cd) << ',' << arm.final_eval_cd.size() << '\n';
  }
  return arms;
}

}  // namespace concord
