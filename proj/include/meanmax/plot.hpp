#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "io_formats.hpp"

namespace meanmax {

// Static SVG line charts: x is the budget n, y the reported metric. Estimated
// series are solid, true curves dashed, CIs shaded polygons. A sidecar CSV
// with the plotted series is written next to the SVG.

struct PlotSeries {
  std::string label;
  bool dashed = false;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;  // empty when the series has no band
  std::vector<double> hi;
};

struct PlotSpec {
  std::string title;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<double> reference;  // horizontal guide line
};

namespace detail {

inline PlotSeries curve_series(const ExpectedMaxCurve& curve, std::string label) {
  PlotSeries s;
  s.label = std::move(label);
  const bool banded = std::all_of(curve.points.begin(), curve.points.end(),
                                  [](const CurvePoint& p) { return p.ci.has_value(); }) &&
                      !curve.points.empty();
  for (const auto& p : curve.points) {
    s.x.push_back(static_cast<double>(p.n));
    s.y.push_back(p.estimate);
    if (banded) {
      s.lo.push_back(p.ci->lo);
      s.hi.push_back(p.ci->hi);
    }
  }
  return s;
}

template <typename Rows, typename Value>
PlotSeries row_series(const Rows& rows, std::string label, Value value) {
  PlotSeries s;
  s.label = std::move(label);
  for (const auto& row : rows) {
    s.x.push_back(static_cast<double>(row.n));
    s.y.push_back(value(row));
    s.lo.push_back(row.ci.lo);
    s.hi.push_back(row.ci.hi);
  }
  return s;
}

struct PlotFromPayload {
  PlotSpec operator()(const EstimateReport& r) const {
    PlotSpec spec{"Expected maximum vs. budget", "expected max", {}, std::nullopt};
    for (const auto& c : r.curves) spec.series.push_back(curve_series(c, std::string(to_string(c.estimator))));
    return spec;
  }

  PlotSpec operator()(const ProbeReport& r) const {
    PlotSpec spec{"Underestimate proportion (" + std::string(to_string(r.estimator)) + ")",
                  "P(estimate < truth)", {}, 0.5};
    spec.series.push_back(
        row_series(r.rows, r.distribution_id.empty() ? "proportion" : r.distribution_id,
                   [](const ProbeRow& row) { return row.proportion; }));
    return spec;
  }

  PlotSpec operator()(const CoverageReport& r) const {
    PlotSpec spec{"Bootstrap CI coverage (" + std::string(to_string(r.estimator)) + ")",
                  "ECP", {}, r.nominal};
    spec.series.push_back(
        row_series(r.rows, r.distribution_id.empty() ? "ecp" : r.distribution_id,
                   [](const CoverageRow& row) { return row.ecp; }));
    return spec;
  }

  PlotSpec operator()(const CurveReport& r) const {
    PlotSpec spec{"Averaged budget-quality curves (" + std::string(to_string(r.estimator)) + ")",
                  "expected max", {}, std::nullopt};
    for (const auto& m : r.models) {
      spec.series.push_back(curve_series(m.averaged, m.name + " (estimated)"));
      PlotSeries truth;
      truth.label = m.name + " (true)";
      truth.dashed = true;
      for (std::size_t k = 0; k < m.truth.size(); ++k) {
        truth.x.push_back(static_cast<double>(m.averaged.points[k].n));
        truth.y.push_back(m.truth[k]);
      }
      spec.series.push_back(std::move(truth));
    }
    return spec;
  }

  PlotSpec operator()(const FailureScanReport&) const {
    throw InvalidInput(InputErrc::out_of_range, "failure-scan reports have no plot");
  }

  PlotSpec operator()(const KsBoundReport&) const {
    throw InvalidInput(InputErrc::out_of_range, "ks-bound reports have no plot");
  }
};

inline std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

inline PlotSpec plot_spec(const ReportEnvelope& report) {
  return std::visit(detail::PlotFromPayload{}, report.payload);
}

inline std::string render_svg(const PlotSpec& spec) {
  constexpr double kWidth = 760, kHeight = 460;
  constexpr double kLeft = 70, kRight = 200, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : spec.series) {
    for (double v : s.x) x_min = std::min(x_min, v), x_max = std::max(x_max, v);
    for (double v : s.y) y_min = std::min(y_min, v), y_max = std::max(y_max, v);
    for (double v : s.lo) y_min = std::min(y_min, v);
    for (double v : s.hi) y_max = std::max(y_max, v);
  }
  if (spec.reference) y_min = std::min(y_min, *spec.reference), y_max = std::max(y_max, *spec.reference);
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_min -= 0.5, x_max += 0.5;
  if (y_max == y_min) y_min -= 0.5, y_max += 0.5;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };
  using detail::fixed;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
         fixed(kHeight, 0) + "\" viewBox=\"0 0 " + fixed(kWidth, 0) + " " + fixed(kHeight, 0) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fixed(kWidth, 0) + "\" height=\"" + fixed(kHeight, 0) +
         "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fixed(kLeft) + "\" y=\"24\" font-size=\"14\">" +
         detail::xml_escape(spec.title) + "</text>\n";

  svg += "<g class=\"axes\" stroke=\"black\">\n";
  svg += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop + plot_h) + "\" x2=\"" +
         fixed(kLeft + plot_w) + "\" y2=\"" + fixed(kTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(kTop) + "\" x2=\"" + fixed(kLeft) +
         "\" y2=\"" + fixed(kTop + plot_h) + "\"/>\n";
  svg += "</g>\n<g class=\"ticks\">\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 5.0;
    const double yv = y_min + (y_max - y_min) * t / 5.0;
    svg += "<text x=\"" + fixed(px(xv)) + "\" y=\"" + fixed(kTop + plot_h + 18) +
           "\" text-anchor=\"middle\">" + detail::tick_label(xv) + "</text>\n";
    svg += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(py(yv) + 4) +
           "\" text-anchor=\"end\">" + detail::tick_label(yv) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + fixed(kLeft + plot_w / 2) + "\" y=\"" + fixed(kHeight - 10) +
         "\" text-anchor=\"middle\">budget n</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed(kTop + plot_h / 2) + "\" transform=\"rotate(-90 16 " +
         fixed(kTop + plot_h / 2) + ")\" text-anchor=\"middle\">" +
         detail::xml_escape(spec.y_label) + "</text>\n";

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    if (s.lo.empty()) continue;
    const char* color = detail::kPalette[i % std::size(detail::kPalette)];
    std::string points;
    for (std::size_t k = 0; k < s.x.size(); ++k) points += fixed(px(s.x[k])) + "," + fixed(py(s.hi[k])) + " ";
    for (std::size_t k = s.x.size(); k-- > 0;) points += fixed(px(s.x[k])) + "," + fixed(py(s.lo[k])) + " ";
    points.pop_back();
    svg += "<polygon class=\"band\" fill=\"" + std::string(color) +
           "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"" + points + "\"/>\n";
  }

  if (spec.reference) {
    svg += "<line class=\"reference\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(py(*spec.reference)) +
           "\" x2=\"" + fixed(kLeft + plot_w) + "\" y2=\"" + fixed(py(*spec.reference)) +
           "\" stroke=\"gray\" stroke-dasharray=\"2 3\"/>\n";
  }

  for (std::size_t i = 0; i < spec.series.size(); ++i) {
    const auto& s = spec.series[i];
    // Estimated and true curves of one model share a colour.
    const std::size_t colour_index = s.dashed && i > 0 ? i - 1 : i;
    const char* color = detail::kPalette[colour_index % std::size(detail::kPalette)];
    std::string points;
    for (std::size_t k = 0; k < s.x.size(); ++k) points += fixed(px(s.x[k])) + "," + fixed(py(s.y[k])) + " ";
    if (!points.empty()) points.pop_back();
    svg += "<polyline class=\"" + std::string(s.dashed ? "truth" : "estimate") +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
           (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + points + "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
    svg += "<line class=\"legend\" x1=\"" + fixed(kLeft + plot_w + 12) + "\" y1=\"" + fixed(ly) +
           "\" x2=\"" + fixed(kLeft + plot_w + 36) + "\" y2=\"" + fixed(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"" + (s.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    svg += "<text x=\"" + fixed(kLeft + plot_w + 42) + "\" y=\"" + fixed(ly + 4) + "\">" +
           detail::xml_escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Sidecar CSV: series,n,value,lo,hi.
inline std::string render_series_csv(const PlotSpec& spec) {
  std::string out = "series,n,value,lo,hi\n";
  for (const auto& s : spec.series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      out += s.label + "," + format_double(s.x[k]) + "," + format_double(s.y[k]) + ",";
      if (!s.lo.empty()) out += format_double(s.lo[k]) + "," + format_double(s.hi[k]);
      else out += ",";
      out += "\n";
    }
  }
  return out;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& svg_path) {
  auto p = svg_path;
  return p.replace_extension(".csv");
}

/// Writes `path` (SVG) and its sidecar CSV.
inline void emit_plot(const ReportEnvelope& report, const std::filesystem::path& path) {
  const auto spec = plot_spec(report);
  detail::write_text(path, render_svg(spec));
  detail::write_text(sidecar_path(path), render_series_csv(spec));
}

}  // namespace meanmax
