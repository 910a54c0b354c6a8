#include "concord/metrics_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "concord/config.hpp"
#include "concord/error.hpp"

namespace concord {

namespace {

template <typename T>
bool parse_field(const std::string& s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

bool MetricRecord::valid() const {
  const auto& m = metrics;
  for (double v : {m.cd_l2, m.cd_l1, m.da_cd, m.f1, ms_per_step}) {
    if (!std::isfinite(v)) return false;
  }
  return m.cd_l2 >= 0.0 && m.cd_l1 >= 0.0 && m.da_cd >= 0.0 && m.f1 >= 0.0 && m.f1 <= 1.0 && ms_per_step >= 0.0 &&
         (split == "train" || split == "eval");
}

std::vector<MetricRecord> records_from_history(const std::string& run, const std::vector<EpochRecord>& history) {
  std::vector<MetricRecord> out;
  out.reserve(2 * history.size());
  for (const auto& h : history) {
    out.push_back({run, h.epoch, "train", h.train, h.ms_per_step});
    out.push_back({run, h.epoch, "eval", h.eval, h.ms_per_step});
  }
  return out;
}

std::string format_record(const MetricRecord& r) {
  std::string line = r.run;
  line += ',' + std::to_string(r.epoch) + ',' + r.split;
  for (double v : {r.metrics.cd_l2, r.metrics.cd_l1, r.metrics.da_cd, r.metrics.f1, r.ms_per_step}) {
    line += ',';
    line += format_double(v);
  }
  return line;
}

void write_metrics_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
  for (const auto& r : records) {
    if (r.run.find_first_of(",\n") != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "run id '" + r.run + "' contains a separator");
    }
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

MetricsFile read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw Error(ErrorCode::IoError, path.string() + " lacks the metrics header");

  MetricsFile file;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_commas(line);
    MetricRecord r;
    bool ok = f.size() == 8 && !f[0].empty();
    if (ok) {
      r.run = f[0];
      r.split = f[2];
      ok = parse_field(f[1], r.epoch) && parse_field(f[3], r.metrics.cd_l2) && parse_field(f[4], r.metrics.cd_l1) &&
           parse_field(f[5], r.metrics.da_cd) && parse_field(f[6], r.metrics.f1) && parse_field(f[7], r.ms_per_step) &&
           r.valid();
    }
    if (ok) {
      file.records.push_back(std::move(r));
    } else {
      ++file.malformed;
    }
  }
  return file;
}

}  // namespace concord
