#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavrsma/experiment.hpp"

namespace uavrsma {

namespace {

struct Table {
  std::vector<std::string> cols;
  std::vector<std::vector<double>> rows;

  size_t col(const std::string& name, const std::string& file) const {
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw std::runtime_error(file + ": missing column " + name);
  }
};

Table read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  const std::string name = path.filename().string();
  if (!f) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(name + ": empty file");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) t.cols.push_back(cell);
  int row_no = 1;
  while (std::getline(f, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error(name + " row " + std::to_string(row_no) + ": bad number '" +
                                 cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.cols.size())
      throw std::runtime_error(name + " row " + std::to_string(row_no) + ": expected " +
                               std::to_string(t.cols.size()) + " fields, got " +
                               std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Minimal line/scatter chart writer, margins fixed, linear axes.
class Svg {
 public:
  Svg(const std::filesystem::path& path, std::string x_label, std::string y_label, double x_lo,
      double x_hi, double y_lo, double y_hi)
      : os_(path), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    pad(x_lo, x_hi);
    pad(y_lo, y_hi);
    x_lo_ = x_lo;
    x_hi_ = x_hi;
    y_lo_ = y_lo;
    y_hi_ = y_hi;
    os_ << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 840 560' "
           "font-family='monospace' font-size='13'>\n"
           "<rect width='840' height='560' fill='white'/>\n";
    axes();
  }

  ~Svg() { os_ << "</svg>\n"; }

  double px(double x) const { return 80.0 + (x - x_lo_) / (x_hi_ - x_lo_) * 700.0; }
  double py(double y) const { return 500.0 - (y - y_lo_) / (y_hi_ - y_lo_) * 440.0; }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double width) {
    if (pts.empty()) return;
    os_ << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width
        << "' points='";
    for (const auto& [x, y] : pts) os_ << px(x) << ',' << py(y) << ' ';
    os_ << "'/>\n";
  }

  void dot(double x, double y, const std::string& color, double r = 3.0) {
    os_ << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='" << r << "' fill='" << color
        << "' fill-opacity='0.6'/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = 70.0;
    for (const auto& [label, color] : entries) {
      os_ << "<rect x='700' y='" << y - 9 << "' width='18' height='4' fill='" << color << "'/>\n"
          << "<text x='724' y='" << y << "'>" << label << "</text>\n";
      y += 18.0;
    }
  }

 private:
  static void pad(double& lo, double& hi) {
    if (hi - lo < 1e-12) {
      const double m = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= m;
      hi += m;
    } else {
      const double m = (hi - lo) * 0.05;
      lo -= m;
      hi += m;
    }
  }

  void axes() {
    os_ << "<line x1='80' y1='500' x2='780' y2='500' stroke='black'/>\n"
           "<line x1='80' y1='60' x2='80' y2='500' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = x_lo_ + (x_hi_ - x_lo_) * i / 5.0;
      const double fy = y_lo_ + (y_hi_ - y_lo_) * i / 5.0;
      char bx[32], by[32];
      std::snprintf(bx, sizeof bx, "%.4g", fx);
      std::snprintf(by, sizeof by, "%.4g", fy);
      os_ << "<line x1='" << px(fx) << "' y1='500' x2='" << px(fx)
          << "' y2='505' stroke='black'/>\n"
          << "<text x='" << px(fx) << "' y='522' text-anchor='middle'>" << bx << "</text>\n"
          << "<line x1='75' y1='" << py(fy) << "' x2='80' y2='" << py(fy)
          << "' stroke='black'/>\n"
          << "<text x='70' y='" << py(fy) + 4 << "' text-anchor='end'>" << by << "</text>\n";
    }
    os_ << "<text x='430' y='550' text-anchor='middle'>" << x_label_ << "</text>\n"
        << "<text x='20' y='280' text-anchor='middle' transform='rotate(-90 20 280)'>"
        << y_label_ << "</text>\n";
  }

  std::ofstream os_;
  std::string x_label_, y_label_;
  double x_lo_ = 0, x_hi_ = 1, y_lo_ = 0, y_hi_ = 1;
};

const char* palette(size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % (sizeof colors / sizeof colors[0])];
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void emit_plots(const std::string& dir) {
  namespace fs = std::filesystem;
  const Table summary = read_csv(fs::path(dir) / "summary.csv");
  const Table history = read_csv(fs::path(dir) / "history.csv");
  const size_t s_val = summary.col("sweep_value", "summary.csv");
  const size_t s_mean = summary.col("mean_sum_mos", "summary.csv");
  summary.col("std_sum_mos", "summary.csv");
  const size_t h_val = history.col("sweep_value", "history.csv");
  const size_t h_seed = history.col("seed", "history.csv");
  const size_t h_iter = history.col("outer_iter", "history.csv");
  const size_t h_mos = history.col("sum_mos", "history.csv");

  // final per-(value, seed) point = the row with the largest outer_iter
  std::map<std::pair<double, double>, std::pair<double, double>> final_pt;  // key -> (iter, mos)
  for (const auto& row : history.rows) {
    auto& slot = final_pt[{row[h_val], row[h_seed]}];
    if (row[h_iter] >= slot.first) slot = {row[h_iter], row[h_mos]};
  }

  {
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto& row : summary.rows) {
      x_lo = std::min(x_lo, row[s_val]);
      x_hi = std::max(x_hi, row[s_val]);
      y_lo = std::min(y_lo, row[s_mean]);
      y_hi = std::max(y_hi, row[s_mean]);
    }
    for (const auto& [key, pt] : final_pt) {
      y_lo = std::min(y_lo, pt.second);
      y_hi = std::max(y_hi, pt.second);
    }
    if (summary.rows.empty()) throw std::runtime_error("summary.csv: no data rows");
    Svg svg(fs::path(dir) / "summary.svg", "sweep value", "sum MOS (seed mean)", x_lo, x_hi,
            y_lo, y_hi);
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : summary.rows) pts.emplace_back(row[s_val], row[s_mean]);
    std::sort(pts.begin(), pts.end());
    svg.polyline(pts, palette(0), 2.5);
    for (const auto& [x, y] : pts) svg.dot(x, y, palette(0), 4.0);
    for (const auto& [key, pt] : final_pt) svg.dot(key.first, pt.second, palette(1), 2.5);
    svg.legend({{"seed mean", palette(0)}, {"per-seed final", palette(1)}});
  }

  {
    if (history.rows.empty()) throw std::runtime_error("history.csv: no data rows");
    double x_hi = 1, y_lo = 1e300, y_hi = -1e300;
    for (const auto& row : history.rows) {
      x_hi = std::max(x_hi, row[h_iter]);
      y_lo = std::min(y_lo, row[h_mos]);
      y_hi = std::max(y_hi, row[h_mos]);
    }
    Svg svg(fs::path(dir) / "trace.svg", "outer iteration", "sum MOS", 1.0, x_hi, y_lo, y_hi);
    // one curve per (value, seed), colored by value
    std::vector<double> values;
    for (const auto& row : history.rows)
      if (std::find(values.begin(), values.end(), row[h_val]) == values.end())
        values.push_back(row[h_val]);
    std::sort(values.begin(), values.end());
    std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> curves;
    for (const auto& row : history.rows)
      curves[{row[h_val], row[h_seed]}].emplace_back(row[h_iter], row[h_mos]);
    for (auto& [key, pts] : curves) {
      std::sort(pts.begin(), pts.end());
      const size_t ci = static_cast<size_t>(
          std::find(values.begin(), values.end(), key.first) - values.begin());
      svg.polyline(pts, palette(ci), 1.2);
    }
    std::vector<std::pair<std::string, std::string>> legend;
    for (size_t i = 0; i < values.size(); ++i)
      legend.emplace_back("value " + short_num(values[i]), palette(i));
    svg.legend(legend);
  }
}

}  // namespace uavrsma
