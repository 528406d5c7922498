#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bpo::cli {

/// A numeric CSV: `#` lines skipped, first remaining line is the header,
/// empty cells read as NaN.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
  }
  std::vector<double> values(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw std::runtime_error("CSV has no column '" + name + "'");
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.columns.empty()) {
      t.columns = split_csv_line(line);
      continue;
    }
    auto cells = split_csv_line(line);
    cells.resize(t.columns.size());
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal SVG canvas mapping data coordinates into a padded plot area.
class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label, double width = 720, double height = 480)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), w_(width), h_(height) {}

  void fit(const std::vector<Series>& series) {
    for (const auto& s : series)
      for (std::size_t i = 0; i < s.x.size(); ++i) include(s.x[i], s.y[i]);
  }
  void include(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0_ = std::min(x0_, x), x1_ = std::max(x1_, x);
    y0_ = std::min(y0_, y), y1_ = std::max(y1_, y);
  }
  void equal_aspect() { equal_ = true; }

  double px(double x) const { return kPad + (x - x0_) / span(x0_, x1_) * plot_w(); }
  double py(double y) const { return h_ - kPad - (y - y0_) / span(y0_, y1_) * plot_h(); }
  double sx(double dx) const { return dx / span(x0_, x1_) * plot_w(); }
  double sy(double dy) const { return dy / span(y0_, y1_) * plot_h(); }

  void polyline(const Series& s, const std::string& color, double width = 1.5, bool dashed = false) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << '"'
       << (dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>";
    body_.push_back(os.str());
  }
  void ellipse(double x, double y, double rx, double ry, const std::string& color) {
    std::ostringstream os;
    os << "<ellipse cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" rx=\"" << sx(rx) << "\" ry=\"" << sy(ry)
       << "\" fill=\"" << color << "\" fill-opacity=\"0.12\" stroke=\"" << color << "\" stroke-width=\"0.8\"/>";
    body_.push_back(os.str());
  }
  void marker(double x, double y, const std::string& color, double r = 4) {
    std::ostringstream os;
    os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r << "\" fill=\"" << color << "\"/>";
    body_.push_back(os.str());
  }
  void vline(double x, const std::string& color) {
    std::ostringstream os;
    os << "<line x1=\"" << px(x) << "\" y1=\"" << py(y0_) << "\" x2=\"" << px(x) << "\" y2=\"" << py(y1_)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\" stroke-opacity=\"0.5\"/>";
    body_.push_back(os.str());
  }
  void legend(const std::string& label, const std::string& color) { legend_.emplace_back(label, color); }

  /// Finalizes ranges; call after all include()/fit() and before drawing.
  void finalize_ranges() {
    if (!(x0_ <= x1_)) x0_ = 0, x1_ = 1;
    if (!(y0_ <= y1_)) y0_ = 0, y1_ = 1;
    if (x0_ == x1_) x0_ -= 0.5, x1_ += 0.5;
    if (y0_ == y1_) y0_ -= 0.5, y1_ += 0.5;
    const double mx = 0.03 * (x1_ - x0_), my = 0.05 * (y1_ - y0_);
    x0_ -= mx, x1_ += mx, y0_ -= my, y1_ += my;
    if (equal_) {
      const double ux = (x1_ - x0_) / plot_w(), uy = (y1_ - y0_) / plot_h();
      if (ux > uy) {
        const double c = 0.5 * (y0_ + y1_), half = 0.5 * ux * plot_h();
        y0_ = c - half, y1_ = c + half;
      } else {
        const double c = 0.5 * (x0_ + x1_), half = 0.5 * uy * plot_w();
        x0_ = c - half, x1_ = c + half;
      }
    }
  }

  void write(std::ostream& os) const {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w_ / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
       << "</text>\n";
    os << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << plot_w() << "\" height=\"" << plot_h()
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double x = x0_ + (x1_ - x0_) * i / 5.0, y = y0_ + (y1_ - y0_) * i / 5.0;
      os << "<text x=\"" << px(x) << "\" y=\"" << h_ - kPad + 16 << "\" text-anchor=\"middle\">" << tick(x)
         << "</text>\n";
      os << "<text x=\"" << kPad - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << tick(y) << "</text>\n";
    }
    os << "<text x=\"" << w_ / 2 << "\" y=\"" << h_ - 12 << "\" text-anchor=\"middle\">" << escape(x_label_)
       << "</text>\n";
    os << "<text transform=\"translate(16," << h_ / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(y_label_) << "</text>\n";
    os << "<svg x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << plot_w() << "\" height=\"" << plot_h()
       << "\" viewBox=\"" << kPad << ' ' << kPad << ' ' << plot_w() << ' ' << plot_h() << "\">\n";
    for (const auto& b : body_) os << b << '\n';
    os << "</svg>\n";
    for (std::size_t i = 0; i < legend_.size(); ++i) {
      const double y = kPad + 14 + 16 * static_cast<double>(i);
      os << "<rect x=\"" << kPad + 10 << "\" y=\"" << y - 9 << "\" width=\"12\" height=\"10\" fill=\""
         << legend_[i].second << "\"/>\n";
      os << "<text x=\"" << kPad + 28 << "\" y=\"" << y << "\">" << escape(legend_[i].first) << "</text>\n";
    }
    os << "</svg>\n";
  }

 private:
  static constexpr double kPad = 64;
  double plot_w() const { return w_ - 2 * kPad; }
  double plot_h() const { return h_ - 2 * kPad; }
  static double span(double a, double b) { return b - a; }
  static std::string tick(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
  }
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }

  std::string title_, x_label_, y_label_;
  double w_, h_;
  double x0_ = std::numeric_limits<double>::infinity(), x1_ = -std::numeric_limits<double>::infinity();
  double y0_ = std::numeric_limits<double>::infinity(), y1_ = -std::numeric_limits<double>::infinity();
  bool equal_ = false;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

inline const std::string& palette(std::size_t i) {
  static const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return colors[i % colors.size()];
}

inline void save_svg(const std::filesystem::path& path, const SvgChart& chart) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  chart.write(os);
}

/// mean_return against iteration, one line per diagnostics file.
inline SvgChart learning_curve_chart(const std::vector<std::filesystem::path>& files) {
  std::vector<Series> series;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    series.push_back({f.stem().string(), t.values("iteration"), t.values("mean_return")});
  }
  SvgChart chart("Learning curve", "iteration", "batch mean return");
  chart.fit(series);
  chart.finalize_ranges();
  for (std::size_t i = 0; i < series.size(); ++i) {
    chart.polyline(series[i], palette(i));
    chart.legend(series[i].label, palette(i));
  }
  return chart;
}

/// Belief entropy (nats) of one trajectory CSV row.
inline double row_belief_entropy(const CsvTable& t, const std::vector<double>& row) {
  double h = 0.0;
  bool gaussian = false;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const std::string& name = t.columns[c];
    if (name.rfind("b_var", 0) == 0) {
      gaussian = true;
      h += 0.5 * std::log(2.0 * M_PI * M_E * row[c]);
    }
  }
  if (gaussian) return h;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    const std::string& name = t.columns[c];
    if (name.size() > 1 && name[0] == 'b' && std::isdigit(static_cast<unsigned char>(name[1])) && row[c] > 0.0)
      h -= row[c] * std::log(row[c]);
  }
  return h;
}

/// Per-step belief entropy averaged over the given trajectory files.
inline Series mean_entropy_per_step(const std::vector<std::filesystem::path>& files) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    const int tc = t.column("t");
    for (const auto& row : t.rows) {
      auto& [sum, n] = acc[static_cast<int>(row[static_cast<std::size_t>(tc)])];
      sum += row_belief_entropy(t, row);
      ++n;
    }
  }
  Series s{"mean belief entropy", {}, {}};
  for (const auto& [step, v] : acc) {
    s.x.push_back(step);
    s.y.push_back(v.first / v.second);
  }
  return s;
}

inline SvgChart entropy_chart(const std::vector<std::filesystem::path>& files) {
  const Series s = mean_entropy_per_step(files);
  SvgChart chart("Belief entropy per step", "t", "entropy (nats)");
  chart.fit({s});
  chart.finalize_ranges();
  chart.polyline(s, palette(0));
  return chart;
}

/// Light-Dark rollouts: true path (latent0, latent1), belief mean path with
/// one-standard-deviation ellipses, goal (s0, s1) and the light at x = 5.
inline SvgChart light_dark_chart(const std::vector<std::filesystem::path>& files) {
  struct Path {
    Series truth, belief;
    std::vector<double> sd_x, sd_y;
    double gx, gy;
  };
  std::vector<Path> paths;
  for (const auto& f : files) {
    const CsvTable t = read_csv(f);
    Path p;
    p.truth = {"true", t.values("latent0"), t.values("latent1")};
    p.belief = {"belief", t.values("b_mean0"), t.values("b_mean1")};
    for (double v : t.values("b_var0")) p.sd_x.push_back(std::sqrt(v));
    for (double v : t.values("b_var1")) p.sd_y.push_back(std::sqrt(v));
    p.gx = t.rows.front()[static_cast<std::size_t>(t.column("s0"))];
    p.gy = t.rows.front()[static_cast<std::size_t>(t.column("s1"))];
    paths.push_back(std::move(p));
  }
  SvgChart chart("Light-Dark rollouts", "x", "y");
  chart.equal_aspect();
  for (const auto& p : paths) {
    chart.fit({p.truth, p.belief});
    chart.include(p.gx, p.gy);
  }
  chart.include(5.0, 0.0);
  chart.finalize_ranges();
  chart.vline(5.0, "#f2c400");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    for (std::size_t k = 0; k < p.belief.x.size(); ++k)
      chart.ellipse(p.belief.x[k], p.belief.y[k], p.sd_x[k], p.sd_y[k], "#1f77b4");
    chart.polyline(p.belief, "#1f77b4", 1.0, true);
    chart.polyline(p.truth, "#333333", 1.8);
    chart.marker(p.truth.x.front(), p.truth.y.front(), "#333333");
    chart.marker(p.gx, p.gy, "#2ca02c", 5);
  }
  chart.legend("true position", "#333333");
  chart.legend("belief mean, 1 sd", "#1f77b4");
  chart.legend("goal", "#2ca02c");
  chart.legend("light (x = 5)", "#f2c400");
  return chart;
}

}  // namespace bpo::cli
