#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cvt {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 45;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<double> smooth(const std::vector<double>& r, int window) {
  std::vector<double> out(r.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    acc += r[i];
    if (i >= static_cast<std::size_t>(window)) acc -= r[i - window];
    out[i] = acc / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

}  // namespace

std::string plot_curves(const std::vector<std::pair<std::string, RewardLog>>& logs,
                        int smoothing_window) {
  if (logs.empty()) throw std::invalid_argument("plot_curves: no logs");
  if (smoothing_window < 1) throw std::invalid_argument("plot_curves: window must be >= 1");
  for (const auto& [name, log] : logs)
    if (log.episodes.empty()) throw std::invalid_argument("plot_curves: empty log '" + name + "'");

  double ymin = 1e300, ymax = -1e300;
  std::size_t xmax = 1;
  std::vector<std::vector<double>> curves;
  for (const auto& [name, log] : logs) {
    curves.push_back(smooth(log.rewards(), smoothing_window));
    for (double v : curves.back()) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    xmax = std::max(xmax, curves.back().size());
  }
  if (ymax == ymin) {
    ymax += 1.0;
    ymin -= 1.0;
  }

  double pw = kWidth - kMarginLeft - kMarginRight;
  double ph = kHeight - kMarginTop - kMarginBottom;
  auto px = [&](double episode) { return kMarginLeft + pw * (episode - 1) / std::max<double>(1.0, static_cast<double>(xmax) - 1); };
  auto py = [&](double v) { return kMarginTop + ph * (1.0 - (v - ymin) / (ymax - ymin)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
     << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop + ph << "\" x2=\""
     << kMarginLeft + pw << "\" y2=\"" << kMarginTop + ph << "\" stroke=\"black\"/>\n";
  // ticks
  for (int i = 0; i <= 4; ++i) {
    double v = ymin + (ymax - ymin) * i / 4.0;
    double y = py(v);
    os << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kMarginLeft
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(y + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    double e = 1 + (static_cast<double>(xmax) - 1) * i / 4.0;
    double x = px(e);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kMarginTop + ph) << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << fmt(kMarginTop + ph + 4) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kMarginTop + ph + 18)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(std::round(e)) << "</text>\n";
  }
  os << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 8
     << "\" font-size=\"13\" text-anchor=\"middle\">episode</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kColors[c % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < curves[c].size(); ++i) {
      if (i) os << " ";
      os << fmt(px(static_cast<double>(i) + 1)) << "," << fmt(py(curves[c][i]));
    }
    os << "\"/>\n";
    // legend entry
    double ly = kMarginTop + 16.0 * static_cast<double>(c) + 10;
    os << "<line x1=\"" << kMarginLeft + pw - 140 << "\" y1=\"" << fmt(ly) << "\" x2=\""
       << kMarginLeft + pw - 120 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kMarginLeft + pw - 114 << "\" y=\"" << fmt(ly + 4)
       << "\" font-size=\"12\">" << logs[c].first << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_plot(const std::vector<std::pair<std::string, RewardLog>>& logs, int smoothing_window,
                const std::string& path) {
  std::string svg = plot_curves(logs, smoothing_window);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("plot: cannot open " + path);
  out << svg;
}

}  // namespace cvt
