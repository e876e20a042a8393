#include "gridao/fom_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gridao/errors.hpp"
#include "gridao/io.hpp"

namespace gridao {

namespace {

struct Mapping {
  double x0, y0;        // top-left of the plot area
  double plot_w, plot_h;
  double xmax, ymax;    // data ranges start at 0

  double px(double fao_value) const { return x0 + plot_w * (fao_value / xmax); }
  double py(double vao_value) const { return y0 + plot_h * (1.0 - vao_value / ymax); }
};

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void emit_axes(std::string& svg, const Mapping& m) {
  svg += "  <g stroke=\"#000\" stroke-width=\"1\" fill=\"none\">\n";
  svg += "    <line x1=\"" + coord(m.x0) + "\" y1=\"" + coord(m.y0 + m.plot_h) + "\" x2=\"" +
         coord(m.x0 + m.plot_w) + "\" y2=\"" + coord(m.y0 + m.plot_h) + "\"/>\n";
  svg += "    <line x1=\"" + coord(m.x0) + "\" y1=\"" + coord(m.y0) + "\" x2=\"" + coord(m.x0) +
         "\" y2=\"" + coord(m.y0 + m.plot_h) + "\"/>\n";
  svg += "  </g>\n";

  const int ticks = 5;
  svg += "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"#000\">\n";
  for (int t = 0; t <= ticks; ++t) {
    const double fx = m.xmax * t / ticks;
    const double x = m.px(fx);
    svg += "    <line x1=\"" + coord(x) + "\" y1=\"" + coord(m.y0 + m.plot_h) + "\" x2=\"" +
           coord(x) + "\" y2=\"" + coord(m.y0 + m.plot_h + 5) +
           "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    svg += "    <text x=\"" + coord(x) + "\" y=\"" + coord(m.y0 + m.plot_h + 18) +
           "\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";

    const double fy = m.ymax * t / ticks;
    const double y = m.py(fy);
    svg += "    <line x1=\"" + coord(m.x0 - 5) + "\" y1=\"" + coord(y) + "\" x2=\"" +
           coord(m.x0) + "\" y2=\"" + coord(y) + "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    svg += "    <text x=\"" + coord(m.x0 - 8) + "\" y=\"" + coord(y + 4) +
           "\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
  }
  svg += "    <text x=\"" + coord(m.x0 + m.plot_w / 2) + "\" y=\"" +
         coord(m.y0 + m.plot_h + 38) + "\" text-anchor=\"middle\">fAO</text>\n";
  svg += "    <text x=\"" + coord(m.x0 - 46) + "\" y=\"" + coord(m.y0 + m.plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 " + coord(m.x0 - 46) + " " +
         coord(m.y0 + m.plot_h / 2) + ")\">vAO</text>\n";
  svg += "  </g>\n";
}

void emit_curve(std::string& svg, const Mapping& m,
                const std::vector<std::pair<double, double>>& curve) {
  if (curve.empty()) return;
  svg += "  <polyline clip-path=\"url(#plot-area)\" fill=\"none\" stroke=\"#000\" "
         "stroke-width=\"1.5\" stroke-dasharray=\"6,4\" points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i != 0) svg += ' ';
    svg += coord(m.px(curve[i].first)) + "," + coord(m.py(curve[i].second));
  }
  svg += "\"/>\n";
}

void emit_markers(std::string& svg, const Mapping& m, std::span<const FomRecord> records) {
  svg += "  <g clip-path=\"url(#plot-area)\">\n";
  for (const auto& rec : records) {
    const double x = m.px(rec.fao);
    const double y = m.py(rec.vao);
    const std::string data = " data-id=\"" + rec.id + "\" data-fao=\"" + format_real(rec.fao) +
                             "\" data-vao=\"" + format_real(rec.vao) + "\"";
    if (rec.flagged) {
      svg += "    <rect class=\"flagged\" x=\"" + coord(x - 4) + "\" y=\"" + coord(y - 4) +
             "\" width=\"8\" height=\"8\" fill=\"#c22\" stroke=\"#801\"" + data + "/>\n";
    } else {
      svg += "    <circle class=\"regular\" cx=\"" + coord(x) + "\" cy=\"" + coord(y) +
             "\" r=\"3.2\" fill=\"#369\" stroke=\"none\"" + data + "/>\n";
    }
  }
  svg += "  </g>\n";
}

}  // namespace

std::string render_fom_svg(std::span<const FomRecord> records, const FomCutoff& cutoff,
                           const FomPlotOptions& options) {
  if (records.empty()) throw InvalidInputError("cannot plot an empty result set");

  double fmax = 0.0, vmax = 0.0;
  for (const auto& rec : records) {
    fmax = std::max(fmax, rec.fao);
    vmax = std::max(vmax, rec.vao);
  }
  const auto curve = cutoff_curve(cutoff, options.curve_segments);
  // Stretch the axes to include the boundary when it sits near the data;
  // a far-away boundary would flatten the scatter into a corner.
  if (!curve.empty()) {
    const double curve_f = cutoff.med_fao * cutoff.cfo_star;
    const double curve_v = cutoff.med_vao * cutoff.cfo_star;
    if (curve_f <= 2.5 * fmax) fmax = std::max(fmax, curve_f);
    if (curve_v <= 2.5 * vmax) vmax = std::max(vmax, curve_v);
  }
  if (fmax <= 0.0) fmax = 1.0;
  if (vmax <= 0.0) vmax = 1.0;

  Mapping m;
  m.x0 = options.margin_left;
  m.y0 = options.margin_top;
  m.plot_w = options.width - options.margin_left - options.margin_right;
  m.plot_h = options.height - options.margin_top - options.margin_bottom;
  m.xmax = fmax * 1.08;
  m.ymax = vmax * 1.08;
  if (m.plot_w <= 0 || m.plot_h <= 0) throw InvalidInputError("plot margins exceed the canvas");

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(options.width) +
         "\" height=\"" + coord(options.height) + "\" viewBox=\"0 0 " + coord(options.width) +
         " " + coord(options.height) + "\">\n";
  svg += "  <defs><clipPath id=\"plot-area\"><rect x=\"" + coord(m.x0) + "\" y=\"" +
         coord(m.y0) + "\" width=\"" + coord(m.plot_w) + "\" height=\"" + coord(m.plot_h) +
         "\"/></clipPath></defs>\n";
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + coord(options.width) + "\" height=\"" +
         coord(options.height) + "\" fill=\"#fff\"/>\n";
  emit_axes(svg, m);
  emit_curve(svg, m, curve);
  emit_markers(svg, m, records);
  svg += "</svg>\n";
  return svg;
}

std::string render_cutoff_curve_csv(const FomCutoff& cutoff, std::size_t segments) {
  std::string out = "fao,vao\n";
  for (const auto& [f, v] : cutoff_curve(cutoff, segments)) {
    out += format_real(f);
    out += ',';
    out += format_real(v);
    out += '\n';
  }
  return out;
}

}  // namespace gridao
