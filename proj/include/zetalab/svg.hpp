#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace zetalab::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool bars = false; // draw as histogram bars of width x[1] - x[0]
};

/// Minimal line/bar chart; log_y plots log10 of positive values only.
inline std::string chart(const std::string &title, const std::vector<Series> &series,
                         const std::string &xlabel, const std::string &ylabel, bool log_y = false) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  for (const auto &s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && !(s.y[i] > 0))
        continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0))
    x1 = x0 + 1;
  if (!log_y)
    y0 = std::min(y0, 0.0);
  if (!(y1 > y0))
    y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
    << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << xv << "</text>\n";
    const double ypix = H - B - (yv - y0) / (y1 - y0) * (H - T - B);
    o << "<text x=\"" << L - 6 << "\" y=\"" << ypix + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << (log_y ? "1e" : "") << yv << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << xlabel << "</text>\n"
    << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << H / 2 << ")\">" << ylabel << "</text>\n";

  int legend = 0;
  for (const auto &s : series) {
    if (s.bars && s.x.size() > 1) {
      const double w = px(s.x[1]) - px(s.x[0]);
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (log_y && !(s.y[i] > 0))
          continue;
        const double top = py(s.y[i]);
        o << "<rect x=\"" << px(s.x[i]) - w / 2 << "\" y=\"" << top << "\" width=\"" << w
          << "\" height=\"" << std::max(0.0, H - B - top) << "\" fill=\"" << s.color
          << "\" fill-opacity=\"0.5\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (!log_y || s.y[i] > 0)
          o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      o << "\"/>\n";
    }
    o << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 14 * (legend++) + 4
      << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write(const std::string &path, const std::string &content) {
  std::ofstream f(path);
  f << content;
}

/// Histogram counts normalized to a density, at bin centres.
inline Series histogram(const std::vector<double> &data, double lo, double hi, int bins,
                        std::string label) {
  Series s;
  s.label = std::move(label);
  s.bars = true;
  s.color = "#7f7f7f";
  std::vector<double> c(static_cast<std::size_t>(bins), 0.0);
  const double w = (hi - lo) / bins;
  std::size_t n = 0;
  for (double v : data) {
    if (!std::isfinite(v))
      continue;
    ++n;
    const int b = static_cast<int>(std::floor((v - lo) / w));
    if (b >= 0 && b < bins)
      c[b] += 1;
  }
  for (int b = 0; b < bins; ++b) {
    s.x.push_back(lo + (b + 0.5) * w);
    s.y.push_back(n ? c[b] / (static_cast<double>(n) * w) : 0.0);
  }
  return s;
}

} // namespace zetalab::svg
