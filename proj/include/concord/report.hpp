#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace concord {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Plain SVG line chart; empty series are skipped.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one bar per legend entry
};

std::string svg_bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& legend,
                          const std::vector<BarGroup>& groups);

struct ReportSummary {
  std::size_t metrics_files = 0;
  std::size_t runs = 0;
  std::size_t malformed_rows = 0;
  std::vector<std::filesystem::path> images;
  std::filesystem::path aggregate;
};

/// Scans `runs_dir` recursively. Every metrics.csv gives one curve image
/// (CD_l2 per epoch for each split, plus the training loss when a
/// train_loss.csv sits next to it) and one aggregate row per run. Every
/// ablation summary found gives a bar chart. Throws NothingToReport when no
/// metrics.csv exists.
ReportSummary cmd_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out);

}  // namespace concord
