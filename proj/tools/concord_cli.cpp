#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "concord/config.hpp"
#include "concord/dataset_io.hpp"
#include "concord/error.hpp"
#include "concord/experiments.hpp"
#include "concord/report.hpp"
#include "concord/shapes.hpp"

using namespace concord;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;

struct Flags {
  std::string config;
  std::string data;
  std::string out;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::vector<double> ratios;
  std::size_t jobs = 0;
  std::string grid;
  std::vector<std::size_t> n_list;
  std::size_t views = 2;
  std::size_t points = 256;
  std::size_t per_family = 100;
  std::string format = "xyz";
};

RunConfig load(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) {
    c.train.seed = *f.seed;
    c.seeds = {*f.seed};
  }
  if (!f.ratios.empty()) {
    if (f.ratios.size() != 1) throw Error(ErrorCode::InvalidArgument, "training takes a single --ratio");
    c.train.ratio = f.ratios.front();
  }
  c.validate();
  return c;
}

// "0:0,0:1,0.1:1"
std::vector<std::pair<double, double>> parse_grid(const std::string& text) {
  std::vector<std::pair<double, double>> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double a, b;
    char colon, extra;
    std::istringstream cs(cell);
    if (!(cs >> a >> colon >> b) || colon != ':' || (cs >> extra)) {
      throw Error(ErrorCode::InvalidArgument, "grid cell '" + cell + "' is not alpha:beta");
    }
    grid.emplace_back(a, b);
  }
  return grid;
}

void print_cells(const std::vector<AlphaBetaCell>& cells) {
  std::printf("alpha  beta   median eval CD-l2\n");
  for (const auto& c : cells) std::printf("%-6g %-6g %.6g\n", c.alpha, c.beta, c.median_cd);
}

int dispatch(CLI::App& app, const Flags& f) {
  const std::size_t jobs = resolve_jobs(f.jobs);
  if (app.got_subcommand("train")) {
    const auto outcome = cmd_train(load(f), f.data, f.out);
    std::printf("final eval CD-l2 %.6g, checkpoint %s\n", outcome.final_eval_cd,
                (outcome.dir / "checkpoint.bin").string().c_str());
  } else if (app.got_subcommand("eval")) {
    const auto ratios = f.ratios.empty() ? std::vector<double>{0.25, 0.5, 0.75} : f.ratios;
    const auto results = cmd_eval(f.checkpoint, f.data, ratios, f.out, f.views, f.seed.value_or(7));
    double avg = 0.0;
    for (const auto& r : results) {
      std::printf("ratio %-5g mean CD-l2 %.6g  F1@1%% %.4f\n", r.ratio, r.summary.mean.cd_l2, r.summary.mean.f1);
      avg += r.summary.mean.cd_l2;
    }
    std::printf("avg CD-l2 %.6g\n", avg / static_cast<double>(results.size()));
  } else if (app.got_subcommand("ablation-ab")) {
    const auto config = load(f);
    const auto grid = f.grid.empty() ? default_alpha_beta_grid() : parse_grid(f.grid);
    print_cells(cmd_ablation_alphabeta(config, load_dataset(f.data), grid, f.out, jobs));
  } else if (app.got_subcommand("ablation-n")) {
    auto config = load(f);
    if (!f.n_list.empty()) config.n_list = f.n_list;
    config.validate();
    std::printf("n   objects/step  median eval CD-l2  ms/step\n");
    for (const auto& c : cmd_ablation_n(config, load_dataset(f.data), f.out, jobs)) {
      std::printf("%-3zu %-13zu %-18.6g %.2f\n", c.n, c.batch_objects, c.median_cd, c.mean_ms);
    }
  } else if (app.got_subcommand("toyset")) {
    for (const auto& arm : cmd_toyset(load(f), load_dataset(f.data), f.out, jobs)) {
      std::printf("%s  eval CD-l2 %.6g +- %.3g  (neighbor inc CD %.4g, mis CD %.4g)\n", arm.name.c_str(), arm.mean_cd,
                  arm.std_cd, arm.mean_incomplete_cd, arm.mean_missing_cd);
    }
  } else if (app.got_subcommand("report")) {
    const auto s = cmd_report(f.data, f.out);
    std::printf("report: %zu runs from %zu metrics files, %zu images, aggregate %s\n", s.runs, s.metrics_files,
                s.images.size(), s.aggregate.string().c_str());
    if (s.malformed_rows) std::printf("warning: skipped %zu malformed rows\n", s.malformed_rows);
  } else if (app.got_subcommand("gen-corpus")) {
    if (f.format != "xyz" && f.format != "pcld") throw Error(ErrorCode::InvalidArgument, "format must be xyz or pcld");
    const auto corpus = generate_shape_corpus(default_shape_specs(f.points), f.per_family, f.seed.value_or(42));
    save_dataset(corpus, f.out, f.format == "xyz" ? CloudFormat::Xyz : CloudFormat::Pcld);
    std::printf("wrote %zu clouds of %zu points to %s\n", corpus.size(), f.points, f.out.c_str());
  }
  return kExitOk;
}

int exit_code(const Error& e) {
  return e.code() == ErrorCode::Divergence ? kExitDivergence : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concord: completion-consistency training and evaluation"};
  app.require_subcommand(1);
  Flags f;

  const auto common = [&](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", f.config, "flat key = value config file");
    if (needs_config) cfg->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "seed override (a single seed for ablations)");
    sub->add_option("--jobs", f.jobs, "parallel runs (0 = all cores, capped by CONCORD_THREADS)");
  };

  auto* train = app.add_subcommand("train", "train one model");
  common(train, true);
  train->add_option("--data", f.data, "dataset directory")->required();
  train->add_option("--out", f.out, "run directory")->required();
  train->add_option("--ratio", f.ratios, "missing ratio during training");

  auto* eval = app.add_subcommand("eval", "score a checkpoint");
  eval->add_option("--checkpoint", f.checkpoint, "checkpoint.bin")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", f.data, "dataset directory")->required();
  eval->add_option("--out", f.out, "output directory")->required();
  eval->add_option("--ratio", f.ratios, "missing ratio(s); default 0.25 0.5 0.75")->delimiter(',');
  eval->add_option("--seed", f.seed, "evaluation seed (default 7)");
  eval->add_option("--views", f.views, "occlusions per object")->capture_default_str();

  auto* ab = app.add_subcommand("ablation-ab", "alpha/beta grid");
  common(ab, false);
  ab->add_option("--data", f.data, "dataset directory")->required();
  ab->add_option("--out", f.out, "output directory")->required();
  ab->add_option("--grid", f.grid, "cells as alpha:beta,... (default 0:0,0:1,1:0,1:1,0.1:1)");
  ab->add_option("--ratio", f.ratios, "missing ratio");

  auto* nsweep = app.add_subcommand("ablation-n", "views-per-object sweep at a fixed cloud budget per step");
  common(nsweep, false);
  nsweep->add_option("--data", f.data, "dataset directory")->required();
  nsweep->add_option("--out", f.out, "output directory")->required();
  nsweep->add_option("--n", f.n_list, "n values (default from config)")->delimiter(',');
  nsweep->add_option("--ratio", f.ratios, "missing ratio");

  auto* toy = app.add_subcommand("toyset", "mined vs uniform toy datasets");
  common(toy, false);
  toy->add_option("--data", f.data, "corpus directory")->required();
  toy->add_option("--out", f.out, "output directory")->required();
  toy->add_option("--ratio", f.ratios, "missing ratio");

  auto* report = app.add_subcommand("report", "plots and aggregate CSV from run directories");
  report->add_option("--data,--runs", f.data, "directory holding runs")->required();
  report->add_option("--out", f.out, "output directory")->required();

  auto* gen = app.add_subcommand("gen-corpus", "write the synthetic shape corpus");
  gen->add_option("--out", f.out, "dataset directory")->required();
  gen->add_option("--seed", f.seed, "corpus seed (default 42)");
  gen->add_option("--points", f.points, "points per cloud")->capture_default_str();
  gen->add_option("--per-family", f.per_family, "clouds per shape family")->capture_default_str();
  gen->add_option("--format", f.format, "xyz or pcld")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    return dispatch(app, f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
