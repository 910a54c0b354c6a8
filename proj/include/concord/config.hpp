#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "concord/toyset.hpp"
#include "concord/train.hpp"

namespace concord {

// Everything a config file can set. Training keys map onto TrainConfig, the
// rest drive the experiment commands.
struct RunConfig {
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3};        // ablation replicas
  std::vector<std::size_t> n_list{2, 3, 4, 6, 12};  // ablation-n
  std::size_t step_budget = 12;                     // clouds per step in ablation-n
  ToyParams toy{100, 5, 400};
  std::size_t toy_replicas = 3;
  std::vector<double> eval_ratios{0.25, 0.5, 0.75};

  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses flat `key = value` text. `#` starts a comment. Unknown keys,
/// duplicate keys and malformed values throw ConfigError naming the line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Every key, one per line, in a fixed order; parse_config reads it back to
/// an equal RunConfig.
std::string serialize_config(const RunConfig& config);

std::string format_double(double v);

}  // namespace concord
