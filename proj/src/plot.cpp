#include "synq/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace synq {

namespace {

constexpr double kWidth = 1000.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 70.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

struct Range {
  double lo, hi;
};

Range padded_range(const std::vector<double>& ys) {
  auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
  double lo = *mn, hi = *mx;
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Indices to draw: first/last of the trace plus the min and max of each bucket.
std::vector<std::size_t> thin(const std::vector<double>& ys, std::size_t max_points) {
  std::vector<std::size_t> idx;
  const std::size_t n = ys.size();
  if (n <= max_points || max_points < 4) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  const std::size_t buckets = max_points / 2;
  for (std::size_t b = 0; b < buckets; ++b) {
    const std::size_t begin = b * n / buckets;
    const std::size_t end = (b + 1) * n / buckets;
    if (begin >= end) continue;
    std::size_t lo = begin, hi = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (ys[i] < ys[lo]) lo = i;
      if (ys[i] > ys[hi]) hi = i;
    }
    idx.push_back(std::min(lo, hi));
    if (lo != hi) idx.push_back(std::max(lo, hi));
  }
  return idx;
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, Range xr,
                     Range yr, std::size_t max_points, const char* color) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  std::string pts;
  for (std::size_t i : thin(ys, max_points)) {
    const double px = kLeft + (xs[i] - xr.lo) / (xr.hi - xr.lo) * pw;
    const double py = kTop + (1.0 - (ys[i] - yr.lo) / (yr.hi - yr.lo)) * ph;
    pts += num(px) + "," + num(py) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_trace_svg(std::span<const TraceRecord> trace, std::size_t max_points) {
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
                    num(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (trace.empty()) return svg + "</svg>\n";

  std::vector<double> xs, field, action;
  for (const auto& t : trace) {
    xs.push_back(static_cast<double>(t.step));
    field.push_back(t.mean_field);
    action.push_back(t.action);
  }
  Range xr{xs.front(), xs.back()};
  if (xr.hi <= xr.lo) xr.hi = xr.lo + 1.0;
  const Range fr = padded_range(field);
  const Range ar = padded_range(action);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kTop, y1 = kHeight - kBottom;

  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x1) + "\" y2=\"" +
         num(y1) + "\"/>\n";
  svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) + "\" y2=\"" +
         num(y1) + "\"/>\n";
  svg += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) + "\" y2=\"" +
         num(y1) + "\"/>\n</g>\n";

  svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double py = y1 - f * (y1 - y0);
    svg += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" fill=\"#1f77b4\">" + label(fr.lo + f * (fr.hi - fr.lo)) +
           "</text>\n";
    svg += "<text x=\"" + num(x1 + 6) + "\" y=\"" + num(py + 4) + "\" fill=\"#ff7f0e\">" +
           label(ar.lo + f * (ar.hi - ar.lo)) + "</text>\n";
    const double px = x0 + f * (x1 - x0);
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(y1 + 18) + "\" text-anchor=\"middle\">" +
           label(xr.lo + f * (xr.hi - xr.lo)) + "</text>\n";
  }
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\">step</text>\n";
  svg += "<text x=\"" + num(x0) + "\" y=\"18\" fill=\"#1f77b4\">mean field</text>\n";
  svg += "<text x=\"" + num(x1) + "\" y=\"18\" text-anchor=\"end\" fill=\"#ff7f0e\">action</text>\n";
  svg += "</g>\n";

  svg += polyline(xs, action, xr, ar, max_points, "#ff7f0e");
  svg += polyline(xs, field, xr, fr, max_points, "#1f77b4");
  svg += "</svg>\n";
  return svg;
}

}  // namespace synq
