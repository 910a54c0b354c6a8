#include "concord/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "concord/config.hpp"
#include "concord/error.hpp"
#include "concord/metrics_csv.hpp"

namespace concord {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const { return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight); }
  double sy(double y) const { return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom); }
};

std::string open_svg(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
                  "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + esc(title) + "</text>\n";
  return s;
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label, bool x_ticks) {
  std::string s;
  const double bx = kLeft, by = kHeight - kBottom, tx = kWidth - kRight;
  s += "<line x1=\"" + px(bx) + "\" y1=\"" + px(by) + "\" x2=\"" + px(tx) + "\" y2=\"" + px(by) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(bx) + "\" y1=\"" + px(by) + "\" x2=\"" + px(bx) + "\" y2=\"" + px(kTop) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s += "<text x=\"" + px(bx - 5) + "\" y=\"" + px(f.sy(y) + 4) + "\" text-anchor=\"end\">" + num(y) + "</text>\n";
    s += "<line x1=\"" + px(bx) + "\" y1=\"" + px(f.sy(y)) + "\" x2=\"" + px(tx) + "\" y2=\"" + px(f.sy(y)) +
         "\" stroke=\"#ddd\"/>\n";
    if (x_ticks) {
      const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
      s += "<text x=\"" + px(f.sx(x)) + "\" y=\"" + px(by + 15) + "\" text-anchor=\"middle\">" + num(x) + "</text>\n";
    }
  }
  s += "<text x=\"" + px((bx + tx) / 2) + "\" y=\"" + px(kHeight - 12) + "\" text-anchor=\"middle\">" + esc(x_label) +
       "</text>\n";
  s += "<text x=\"15\" y=\"" + px((by + kTop) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
       px((by + kTop) / 2) + ")\">" + esc(y_label) + "</text>\n";
  return s;
}

std::string legend_entry(std::size_t i, const std::string& label) {
  const double y = kTop + 10 + 18.0 * static_cast<double>(i);
  const double x = kWidth - kRight + 15;
  const char* color = kPalette[i % std::size(kPalette)];
  return "<rect x=\"" + px(x) + "\" y=\"" + px(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n" +
         "<text x=\"" + px(x + 15) + "\" y=\"" + px(y + 1) + "\">" + esc(label) + "</text>\n";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty() && item.back() == '\r') item.pop_back();
    out.push_back(item);
  }
  return out;
}

bool parse_double(const std::string& s, double& v) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v);
}

std::string slug(const fs::path& rel) {
  std::string s = rel.generic_string();
  if (s.empty() || s == ".") return "root";
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

// Reads epoch -> train_loss from a train_loss.csv (run,epoch,train_loss).
std::map<std::string, Series> read_losses(const fs::path& path, std::size_t& malformed) {
  std::map<std::string, Series> out;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_commas(line);
    double epoch, loss;
    if (f.size() != 3 || !parse_double(f[1], epoch) || !parse_double(f[2], loss)) {
      ++malformed;
      continue;
    }
    auto& s = out[f[0]];
    s.label = "train loss";
    s.x.push_back(epoch);
    s.y.push_back(loss);
  }
  return out;
}

// A runs.csv from an ablation: key columns precede "seed", the value is
// final_eval_cd_l2. Groups bars by key, one bar per seed.
bool ablation_chart(const fs::path& runs_csv, const std::string& title, std::string& svg, std::size_t& malformed) {
  std::ifstream in(runs_csv);
  std::string line;
  if (!std::getline(in, line)) return false;
  const auto header = split_commas(line);
  const auto seed_it = std::find(header.begin(), header.end(), "seed");
  const auto val_it = std::find(header.begin(), header.end(), "final_eval_cd_l2");
  if (seed_it == header.end() || val_it == header.end() || seed_it == header.begin()) return false;
  const std::size_t seed_col = static_cast<std::size_t>(seed_it - header.begin());
  const std::size_t val_col = static_cast<std::size_t>(val_it - header.begin());

  std::vector<std::string> legend;
  std::vector<BarGroup> groups;
  std::string key_name;
  for (std::size_t c = 0; c < seed_col; ++c) key_name += (c ? "," : "") + header[c];
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_commas(line);
    double v;
    if (f.size() != header.size() || !parse_double(f[val_col], v)) {
      ++malformed;
      continue;
    }
    std::string key = "(";
    for (std::size_t c = 0; c < seed_col; ++c) key += (c ? "," : "") + f[c];
    key += ")";
    const std::string seed = "seed " + f[seed_col];
    auto lit = std::find(legend.begin(), legend.end(), seed);
    if (lit == legend.end()) {
      legend.push_back(seed);
      lit = legend.end() - 1;
    }
    auto git = std::find_if(groups.begin(), groups.end(), [&](const BarGroup& g) { return g.label == key; });
    if (git == groups.end()) {
      groups.push_back({key, {}});
      git = groups.end() - 1;
    }
    const std::size_t slot = static_cast<std::size_t>(lit - legend.begin());
    if (git->values.size() <= slot) git->values.resize(slot + 1, std::nan(""));
    git->values[slot] = v;
  }
  if (groups.empty()) return false;
  svg = svg_bar_chart(title + " keyed by " + key_name, "final eval CD-l2", legend, groups);
  return true;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series) {
  Frame f{0, 1, 0, 1};
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!any) {
        f = {s.x[i], s.x[i], s.y[i], s.y[i]};
        any = true;
      }
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  }
  f.y0 = std::min(f.y0, 0.0);
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1;
  std::string svg = open_svg(title) + axes(f, x_label, y_label, true);
  std::size_t idx = 0;
  for (const auto& s : series) {
    if (s.x.empty()) continue;
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      pts += px(f.sx(s.x[i])) + "," + px(f.sy(s.y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" + std::string(kPalette[idx % std::size(kPalette)]) +
           "\" points=\"" + pts + "\"/>\n";
    svg += legend_entry(idx, s.label);
    ++idx;
  }
  return svg + "</svg>\n";
}

std::string svg_bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& legend,
                          const std::vector<BarGroup>& groups) {
  Frame f{0, 1, 0, 0};
  for (const auto& g : groups) {
    for (double v : g.values) {
      if (std::isfinite(v)) f.y1 = std::max(f.y1, v);
    }
  }
  if (f.y1 <= 0) f.y1 = 1;
  std::string svg = open_svg(title) + axes(f, "", y_label, false);
  const double span = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, groups.size()));
  const double bar = span * 0.8 / static_cast<double>(std::max<std::size_t>(1, legend.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double base = kLeft + span * static_cast<double>(g) + span * 0.1;
    for (std::size_t b = 0; b < groups[g].values.size(); ++b) {
      const double v = groups[g].values[b];
      if (!std::isfinite(v)) continue;
      const double top = f.sy(v);
      svg += "<rect x=\"" + px(base + bar * static_cast<double>(b)) + "\" y=\"" + px(top) + "\" width=\"" +
             px(bar * 0.9) + "\" height=\"" + px(f.sy(0) - top) + "\" fill=\"" + kPalette[b % std::size(kPalette)] +
             "\"><title>" + esc(groups[g].label) + " " + num(v) + "</title></rect>\n";
    }
    svg += "<text x=\"" + px(base + span * 0.4) + "\" y=\"" + px(kHeight - kBottom + 15) +
           "\" text-anchor=\"middle\">" + esc(groups[g].label) + "</text>\n";
  }
  for (std::size_t i = 0; i < legend.size(); ++i) svg += legend_entry(i, legend[i]);
  return svg + "</svg>\n";
}

ReportSummary cmd_report(const fs::path& runs_dir, const fs::path& out) {
  if (!fs::is_directory(runs_dir)) throw Error(ErrorCode::NothingToReport, runs_dir.string() + " is not a directory");
  std::vector<fs::path> metric_files, runs_files;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "metrics.csv") metric_files.push_back(entry.path());
    if (entry.path().filename() == "runs.csv") runs_files.push_back(entry.path());
  }
  if (metric_files.empty()) throw Error(ErrorCode::NothingToReport, "no metrics.csv under " + runs_dir.string());
  std::sort(metric_files.begin(), metric_files.end());
  std::sort(runs_files.begin(), runs_files.end());
  fs::create_directories(out);

  ReportSummary summary;
  summary.metrics_files = metric_files.size();
  std::ofstream agg(out / "aggregate.csv");
  if (!agg) throw Error(ErrorCode::IoError, "cannot write aggregate.csv");
  agg << "source,run,final_epoch,final_train_cd_l2,final_eval_cd_l2,final_eval_cd_l1,final_eval_da_cd,"
         "final_eval_f1_1pct,mean_ms_per_step\n";

  for (const auto& path : metric_files) {
    MetricsFile file;
    try {
      file = read_metrics_csv(path);
    } catch (const Error&) {
      ++summary.malformed_rows;  // unreadable header counts as one bad row
      continue;
    }
    summary.malformed_rows += file.malformed;
    const fs::path rel = fs::relative(path.parent_path(), runs_dir);
    auto losses = read_losses(path.parent_path() / "train_loss.csv", summary.malformed_rows);

    std::map<std::string, std::vector<const MetricRecord*>> by_run;
    std::vector<std::string> order;
    for (const auto& r : file.records) {
      if (!by_run.count(r.run)) order.push_back(r.run);
      by_run[r.run].push_back(&r);
    }
    std::vector<Series> series;
    for (const auto& run : order) {
      Series tr{run + " train CD", {}, {}}, ev{run + " eval CD", {}, {}};
      const MetricRecord* last_train = nullptr;
      const MetricRecord* last_eval = nullptr;
      double ms = 0.0;
      std::size_t ms_n = 0;
      for (const auto* r : by_run[run]) {
        auto& s = r->split == "train" ? tr : ev;
        s.x.push_back(static_cast<double>(r->epoch));
        s.y.push_back(r->metrics.cd_l2);
        auto& last = r->split == "train" ? last_train : last_eval;
        if (!last || r->epoch >= last->epoch) last = r;
        if (r->split == "eval") {
          ms += r->ms_per_step;
          ++ms_n;
        }
      }
      series.push_back(tr);
      series.push_back(ev);
      if (auto it = losses.find(run); it != losses.end()) {
        it->second.label = run + " train loss";
        series.push_back(it->second);
      }
      ++summary.runs;
      const std::size_t epoch = last_eval ? last_eval->epoch : (last_train ? last_train->epoch : 0);
      agg << rel.generic_string() << ',' << run << ',' << epoch << ','
          << (last_train ? format_double(last_train->metrics.cd_l2) : "") << ',';
      if (last_eval) {
        agg << format_double(last_eval->metrics.cd_l2) << ',' << format_double(last_eval->metrics.cd_l1) << ','
            << format_double(last_eval->metrics.da_cd) << ',' << format_double(last_eval->metrics.f1);
      } else {
        agg << ",,,";
      }
      agg << ',' << format_double(ms_n ? ms / static_cast<double>(ms_n) : 0.0) << '\n';
    }
    const fs::path image = out / ("curves_" + slug(rel) + ".svg");
    write_file(image, svg_line_chart(rel.generic_string(), "epoch", "CD-l2 / loss", series));
    summary.images.push_back(image);
  }

  for (const auto& path : runs_files) {
    const fs::path rel = fs::relative(path.parent_path(), runs_dir);
    std::string svg;
    if (ablation_chart(path, slug(rel), svg, summary.malformed_rows)) {
      const fs::path image = out / ("bars_" + slug(rel) + ".svg");
      write_file(image, svg);
      summary.images.push_back(image);
    }
  }
  agg.flush();
  if (!agg) throw Error(ErrorCode::IoError, "write failed for aggregate.csv");
  summary.aggregate = out / "aggregate.csv";
  return summary;
}

}  // namespace concord
