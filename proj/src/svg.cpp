#include "lzkit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lzkit {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v, double pix_lo, double pix_hi) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    const double f = (x - a) / (b - a);
    return pix_lo + f * (pix_hi - pix_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const int klo = static_cast<int>(std::ceil(std::log10(lo) - 1e-9));
      const int khi = static_cast<int>(std::floor(std::log10(hi) + 1e-9));
      for (int k = klo; k <= khi; ++k) out.push_back(std::pow(10.0, k));
      if (out.size() < 2) {
        out = {lo, hi};
      }
      return out;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    }
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 0.5 * step; v += step) out.push_back(v);
    return out;
  }
};

std::string fmt(double v) {
  if (v == 0.0) return "0";  // avoid "-0" tick labels
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  if (spec.series.empty())
    throw std::invalid_argument("plot needs at least one series");

  // Collect plottable points (log axes exclude non-positive coordinates).
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  size_t usable = 0;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("series x/y size mismatch");
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if (spec.logx && !(s.x[k] > 0.0)) continue;
      if (spec.logy && !(s.y[k] > 0.0)) continue;
      x_lo = std::min(x_lo, s.x[k]);
      x_hi = std::max(x_hi, s.x[k]);
      y_lo = std::min(y_lo, s.y[k]);
      y_hi = std::max(y_hi, s.y[k]);
      ++usable;
    }
  }
  if (usable == 0) throw std::invalid_argument("plot has no plottable points");

  if (x_lo == x_hi) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_lo == y_hi) {
    y_lo = spec.logy ? 0.5 * y_lo : y_lo - 0.5;
    y_hi = spec.logy ? 2.0 * y_hi : y_hi + 0.5;
  }
  // Pad linear ranges a little so points sit inside the frame.
  if (!spec.logx) {
    const double pad = 0.05 * (x_hi - x_lo);
    x_lo -= pad;
    x_hi += pad;
  }
  if (!spec.logy) {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const Axis ax{x_lo, x_hi, spec.logx};
  const Axis ay{y_lo, y_hi, spec.logy};

  const double ml = 72, mr = 24, mt = 40, mb = 52;
  const double px0 = ml, px1 = spec.width - mr;
  const double py0 = spec.height - mb, py1 = mt;  // y grows upward

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << ' ' << spec.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << spec.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape(spec.title) << "</text>\n";

  // frame
  svg << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\""
      << px1 - px0 << "\" height=\"" << py0 - py1
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double v : ax.ticks()) {
    if (v < x_lo || v > x_hi) continue;
    const double x = ax.map(v, px0, px1);
    svg << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << x
        << "\" y2=\"" << py0 + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << py0 + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(v) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    if (v < y_lo || v > y_hi) continue;
    const double y = ay.map(v, py0, py1);
    svg << "<line x1=\"" << px0 - 5 << "\" y1=\"" << y << "\" x2=\"" << px0
        << "\" y2=\"" << y << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px0 - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << fmt(v) << "</text>\n";
  }

  svg << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << spec.height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << escape(spec.xlabel) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (py0 + py1) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << (py0 + py1) / 2 << ")\">" << escape(spec.ylabel) << "</text>\n";

  for (size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    if (s.line) {
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (size_t k = 0; k < s.x.size(); ++k) {
        if (spec.logx && !(s.x[k] > 0.0)) continue;
        if (spec.logy && !(s.y[k] > 0.0)) continue;
        svg << ax.map(s.x[k], px0, px1) << ',' << ay.map(s.y[k], py0, py1)
            << ' ';
      }
      svg << "\"/>\n";
    } else {
      for (size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
        if (spec.logx && !(s.x[k] > 0.0)) continue;
        if (spec.logy && !(s.y[k] > 0.0)) continue;
        svg << "<circle cx=\"" << ax.map(s.x[k], px0, px1) << "\" cy=\""
            << ay.map(s.y[k], py0, py1) << "\" r=\"3.2\" fill=\"" << color
            << "\"/>\n";
      }
    }
    // legend entry
    const double ly = py1 + 16 + 18 * static_cast<double>(si);
    svg << "<rect x=\"" << px1 - 160 << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    svg << "<text x=\"" << px1 - 144 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(s.label) << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lzkit
