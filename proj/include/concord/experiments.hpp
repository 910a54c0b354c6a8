#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "concord/config.hpp"
#include "concord/train.hpp"

namespace concord {

enum class ExperimentKind { Train, Eval, AblationAlphaBeta, AblationN, ToysetAB };

std::string kind_name(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct ExperimentManifest {
  ExperimentKind kind = ExperimentKind::Train;
  RunConfig config;
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> outputs;  // role -> path relative to the run dir
  std::map<std::string, std::string> inputs;   // role -> path as given

  friend bool operator==(const ExperimentManifest&, const ExperimentManifest&) = default;
};

inline constexpr const char* kManifestFile = "manifest.json";

std::string manifest_to_json(const ExperimentManifest& m);
ExperimentManifest manifest_from_json(const std::string& text);
void write_manifest(const ExperimentManifest& m, const std::filesystem::path& dir);
ExperimentManifest read_manifest(const std::filesystem::path& dir);

/// Worker count: the requested value (0 = hardware concurrency) capped by
/// CONCORD_THREADS when that is set to a positive integer.
std::size_t resolve_jobs(std::size_t requested);

/// Runs task(i) for i in [0, count) on up to `jobs` threads. The first
/// exception (lowest index) is rethrown after every task has finished.
void run_parallel(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

struct TrainOutcome {
  TrainResult result;
  std::filesystem::path dir;
  double final_eval_cd = 0.0;
  double mean_ms_per_step = 0.0;
};

/// Trains on `dataset` and writes manifest.json (first), checkpoint.bin,
/// metrics.csv, train_loss.csv and config.cfg into `out`.
TrainOutcome run_training(const RunConfig& config, const std::vector<PointCloud>& dataset,
                          const std::filesystem::path& out, const std::string& run_id,
                          const std::map<std::string, std::string>& inputs = {});

TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& data, const std::filesystem::path& out);

struct RatioEval {
  double ratio = 0.0;
  EvalSummary summary;
};

/// Scores a checkpoint at each ratio with fixed evaluation seeds. Writes
/// objects.csv (per object and ratio) and metrics.csv (one row per ratio
/// plus an "avg" row over ratios).
std::vector<RatioEval> cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data,
                                const std::vector<double>& ratios, const std::filesystem::path& out,
                                std::size_t views, std::uint64_t seed);

struct AlphaBetaCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> final_eval_cd;  // one per seed
  double median_cd = 0.0;
};

std::vector<std::pair<double, double>> default_alpha_beta_grid();

/// One training run per (cell, seed) on a shared corpus; summary.csv holds
/// one row per cell with the median over seeds, runs.csv one row per run.
std::vector<AlphaBetaCell> cmd_ablation_alphabeta(const RunConfig& config, const std::vector<PointCloud>& dataset,
                                                  const std::vector<std::pair<double, double>>& grid,
                                                  const std::filesystem::path& out, std::size_t jobs);

struct NCell {
  std::size_t n = 0;
  std::size_t batch_objects = 0;
  std::vector<double> final_eval_cd;
  std::vector<double> ms_per_step;
  double median_cd = 0.0;
  double mean_ms = 0.0;
};

/// Every step sees step_budget clouds: step_budget / n objects with n views
/// each. Epochs stay fixed, so larger n takes more, smaller steps.
std::vector<NCell> cmd_ablation_n(const RunConfig& config, const std::vector<PointCloud>& dataset,
                                  const std::filesystem::path& out, std::size_t jobs);

struct ToysetArm {
  std::string name;  // "DA" or "DB"
  std::vector<std::vector<std::size_t>> members;  // corpus indices, one set per replica
  double mean_incomplete_cd = 0.0;                // neighbor-group statistics, mean over replicas
  double mean_missing_cd = 0.0;
  std::vector<double> final_eval_cd;  // one per replica
  double mean_cd = 0.0;
  double std_cd = 0.0;
};

/// For each of toy_replicas seeds: mines D^A, samples D^B of the same size,
/// and checks that D^A's neighbor groups have lower incomplete CD and higher
/// missing CD than D^B's (InsufficientCorpus otherwise). Then trains one run
/// per replica and dataset with an 80/20 split.
std::vector<ToysetArm> cmd_toyset(const RunConfig& config, const std::vector<PointCloud>& corpus,
                                  const std::filesystem::path& out, std::size_t jobs);

double median(std::vector<double> v);

}  // namespace concord
