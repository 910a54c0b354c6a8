#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "concord/train.hpp"

namespace concord {

inline constexpr const char* kMetricsHeader = "run,epoch,split,cd_l2,cd_l1,da_cd,f1_1pct,ms_per_step";

struct MetricRecord {
  std::string run;
  std::size_t epoch = 0;
  std::string split;  // "train" or "eval"
  EvalMetrics metrics;
  double ms_per_step = 0.0;

  // Finite metrics, nonnegative distances, f1 in [0, 1].
  bool valid() const;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

// Two rows per epoch, train then eval.
std::vector<MetricRecord> records_from_history(const std::string& run, const std::vector<EpochRecord>& history);

std::string format_record(const MetricRecord& r);
void write_metrics_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path);

struct MetricsFile {
  std::vector<MetricRecord> records;
  std::size_t malformed = 0;  // rows skipped
};

/// Reads a metrics CSV. Rows that do not parse or fail valid() are counted
/// and skipped. A missing or wrong header is an IoError.
MetricsFile read_metrics_csv(const std::filesystem::path& path);

}  // namespace concord
