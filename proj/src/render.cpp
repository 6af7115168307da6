#include "storyline/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>

#include "storyline/error.hpp"

namespace storyline {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string label_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

std::string escape(const std::string& text) {
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

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void add(std::string element) { body_ += "  " + element + "\n"; }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double w = 1.0,
            const std::string& extra = "") {
    add("<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
        "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) + "\"" + extra + "/>");
  }

  void text(double x, double y, const std::string& content, const std::string& anchor = "middle",
            double size = 11.0, const std::string& extra = "") {
    add("<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"" +
        num(size) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" + escape(content) + "</text>");
  }

  void circle(double x, double y, double r, const std::string& fill, const std::string& extra = "") {
    add("<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"" + extra + "/>");
  }

  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& extra = "") {
    add("<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
        "\" fill=\"" + fill + "\"" + extra + "/>");
  }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
           "  <rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" fill=\"#ffffff\"/>\n" + body_ + "</svg>\n";
  }

 private:
  double width_, height_;
  std::string body_;
};

std::string points_attr(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(pts[i].first) + "," + num(pts[i].second);
  }
  return s;
}

// Small padlock centered on (x, y). Open locks lift the shackle, partial ones
// are half filled, locked ones are solid.
void lock_glyph(Svg& svg, double x, double y, LockLevel level) {
  const std::string cls = std::string("lock lock-") + to_string(level);
  std::string g = "<g class=\"" + cls + "\">";
  const double bx = x - 5.0, by = y - 1.0;
  const std::string shackle_y = num(level == LockLevel::Open ? by - 3.0 : by);
  g += "<path d=\"M " + num(x - 3.0) + " " + shackle_y + " v -3 a 3 3 0 0 1 6 0 v " +
       (level == LockLevel::Open ? std::string("-1") : std::string("3")) +
       "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.2\"/>";
  g += "<rect x=\"" + num(bx) + "\" y=\"" + num(by) + "\" width=\"10\" height=\"7\" fill=\"" +
       (level == LockLevel::Locked ? "#333333" : "#ffffff") + "\" stroke=\"#333333\" stroke-width=\"1\"/>";
  if (level == LockLevel::Partial) {
    g += "<rect x=\"" + num(bx) + "\" y=\"" + num(by + 3.5) + "\" width=\"10\" height=\"3.5\" fill=\"#333333\"/>";
  }
  g += "</g>";
  svg.add(g);
}

struct Axis {
  double lo, hi;
  double to_px(double v, double px_lo, double px_hi) const {
    return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
  }
};

Axis padded_axis(double lo, double hi) {
  double span = hi - lo;
  if (!(span > 0.0)) span = std::max(std::abs(lo), 1.0);
  const double pad = 0.05 * span;
  if (hi - lo > 0.0) return {lo - pad, hi + pad};
  return {lo - pad * 10.0, hi + pad * 10.0};
}

// Frame with ticks for a plot area [x0, x1] x [y0, y1] (y grows downward).
void frame(Svg& svg, const Axis& ax, const Axis& ay, double x0, double x1, double y0, double y1,
           const std::string& x_title, const std::string& y_title) {
  svg.line(x0, y1, x1, y1, "#333333");
  svg.line(x0, y0, x0, y1, "#333333");
  for (int t = 0; t <= 4; ++t) {
    const double vx = ax.lo + (ax.hi - ax.lo) * t / 4.0;
    const double px = ax.to_px(vx, x0, x1);
    svg.line(px, y1, px, y1 + 4.0, "#333333");
    svg.text(px, y1 + 16.0, label_num(vx), "middle", 10.0);
    const double vy = ay.lo + (ay.hi - ay.lo) * t / 4.0;
    const double py = ay.to_px(vy, y1, y0);
    svg.line(x0 - 4.0, py, x0, py, "#333333");
    svg.text(x0 - 7.0, py + 3.5, label_num(vy), "end", 10.0);
  }
  svg.text((x0 + x1) / 2.0, y1 + 34.0, x_title, "middle", 12.0);
  svg.text(16.0, (y0 + y1) / 2.0, y_title, "middle", 12.0,
           " transform=\"rotate(-90 " + num(16.0) + " " + num((y0 + y1) / 2.0) + ")\"");
}

void legend(Svg& svg, double x, double y, const std::vector<std::pair<std::string, std::string>>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double yy = y + 16.0 * static_cast<double>(i);
    svg.add("<g class=\"legend-entry\">");
    svg.rect(x, yy - 8.0, 10.0, 10.0, entries[i].second);
    svg.text(x + 15.0, yy + 1.0, entries[i].first, "start", 11.0);
    svg.add("</g>");
  }
}

void series(Svg& svg, const std::vector<std::pair<double, double>>& px, const std::string& color,
            const std::string& name, bool dashed = false) {
  svg.add("<g class=\"series\" data-name=\"" + escape(name) + "\">");
  if (px.size() > 1) {
    svg.add("<polyline points=\"" + points_attr(px) + "\" fill=\"none\" stroke=\"" + color +
            "\" stroke-width=\"1.5\"" + (dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>");
  }
  for (const auto& [x, y] : px) svg.circle(x, y, 3.0, color, " class=\"marker\"");
  svg.add("</g>");
}

constexpr double kPlotW = 560.0, kPlotH = 380.0;
constexpr double kLeft = 70.0, kRight = 400.0, kTop = 40.0, kBottom = 320.0;

}  // namespace

const std::array<const char*, 8>& cluster_palette() noexcept {
  static const std::array<const char*, 8> palette = {"#E69F00", "#56B4E9", "#009E73", "#F0E442",
                                                     "#0072B2", "#D55E00", "#CC79A7", "#000000"};
  return palette;
}

const char* cluster_color(int label) noexcept {
  if (label < 0) return "#999999";
  return cluster_palette()[static_cast<std::size_t>(label) % 8];
}

std::string render_radar_svg(const NodeSummary& summary, std::span<const OutputDescriptor> descriptors,
                             std::span<const Range> initial_ranges, const RadarStyle& style) {
  const std::size_t m = summary.ranges.size();
  if (m < 1) throw DataError("a radar figure needs at least one output");
  if (descriptors.size() != m || initial_ranges.size() != m || summary.locks.size() != m) {
    throw DataError("radar inputs disagree on the number of outputs");
  }
  std::vector<double> lo(m), hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = initial_ranges[j].width();
    if (!(w > 0.0)) throw DataError("radar axis '" + descriptors[j].name + "' has a zero initial range");
    lo[j] = (summary.ranges[j].min - initial_ranges[j].min) / w;
    hi[j] = (summary.ranges[j].max - initial_ranges[j].min) / w;
  }

  const std::string color = cluster_color(style.label);
  char sigma_buf[64];
  std::snprintf(sigma_buf, sizeof sigma_buf, "Σ = %.3f   n = %zu", summary.sigma, summary.count);

  if (m < 3) {
    const double width = style.size, row_h = 44.0;
    Svg svg(width, 70.0 + row_h * static_cast<double>(m));
    if (!style.title.empty()) svg.text(width / 2.0, 22.0, style.title, "middle", 13.0);
    const double x0 = 140.0, x1 = width - 50.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double y = 50.0 + row_h * static_cast<double>(j);
      svg.text(x0 - 8.0, y + 4.0, descriptors[j].name, "end", 11.0);
      svg.rect(x0, y - 6.0, x1 - x0, 12.0, "#eeeeee", " stroke=\"#999999\" stroke-width=\"0.5\"");
      const double a = x0 + lo[j] * (x1 - x0), b = x0 + hi[j] * (x1 - x0);
      svg.rect(a, y - 6.0, b - a, 12.0, color, " fill-opacity=\"0.6\" class=\"band\"");
      lock_glyph(svg, x1 + 20.0, y, summary.locks[j]);
    }
    svg.text(width / 2.0, 50.0 + row_h * static_cast<double>(m), sigma_buf, "middle", 12.0, " class=\"sigma\"");
    return svg.str();
  }

  const double size = style.size, cx = size / 2.0, cy = size / 2.0 + 8.0, radius = style.radius;
  Svg svg(size, size + 24.0);
  if (!style.title.empty()) svg.text(cx, 20.0, style.title, "middle", 13.0);

  const auto at = [&](std::size_t j, double r) {
    const double angle = -std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
    return std::pair{cx + r * radius * std::cos(angle), cy + r * radius * std::sin(angle)};
  };

  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < m; ++j) pts.push_back(at(j, ring));
    svg.add("<polygon points=\"" + points_attr(pts) + "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.8\"/>");
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto [x, y] = at(j, 1.0);
    svg.line(cx, cy, x, y, "#bbbbbb", 0.8);
  }

  std::vector<std::pair<double, double>> outer, inner;
  for (std::size_t j = 0; j < m; ++j) {
    outer.push_back(at(j, hi[j]));
    inner.push_back(at(j, lo[j]));
  }
  std::string d = "M";
  for (std::size_t j = 0; j < m; ++j) d += (j ? " L " : " ") + num(outer[j].first) + " " + num(outer[j].second);
  d += " Z M";
  for (std::size_t j = 0; j < m; ++j) d += (j ? " L " : " ") + num(inner[j].first) + " " + num(inner[j].second);
  d += " Z";
  svg.add("<path class=\"band\" d=\"" + d + "\" fill=\"" + color + "\" fill-opacity=\"0.35\" fill-rule=\"evenodd\"/>");
  svg.add("<polygon class=\"max\" points=\"" + points_attr(outer) + "\" fill=\"none\" stroke=\"" + color +
          "\" stroke-width=\"1.5\"/>");
  svg.add("<polygon class=\"min\" points=\"" + points_attr(inner) + "\" fill=\"none\" stroke=\"" + color +
          "\" stroke-width=\"1.5\"/>");

  for (std::size_t j = 0; j < m; ++j) {
    const auto [lx, ly] = at(j, 1.0 + 22.0 / radius);
    lock_glyph(svg, lx, ly, summary.locks[j]);
    const auto [tx, ty] = at(j, 1.0 + 42.0 / radius);
    const std::string anchor = std::abs(tx - cx) < 1.0 ? "middle" : (tx > cx ? "start" : "end");
    svg.text(tx, ty + 4.0, descriptors[j].name, anchor, 11.0);
  }
  svg.text(cx, size + 14.0, sigma_buf, "middle", 12.0, " class=\"sigma\"");
  return svg.str();
}

std::string render_elbow_svg(std::span<const ElbowPoint> curve) {
  if (curve.empty()) throw DataError("empty elbow curve");
  double xmin = static_cast<double>(curve.front().k), xmax = xmin;
  double ymin = curve.front().d_initial, ymax = ymin;
  for (const auto& p : curve) {
    xmin = std::min(xmin, static_cast<double>(p.k));
    xmax = std::max(xmax, static_cast<double>(p.k));
    ymin = std::min(ymin, p.d_initial);
    ymax = std::max(ymax, p.d_initial);
    if (p.d_reordered) {
      ymin = std::min(ymin, *p.d_reordered);
      ymax = std::max(ymax, *p.d_reordered);
    }
  }
  const Axis ax = padded_axis(xmin, xmax), ay = padded_axis(ymin, ymax);
  Svg svg(kPlotW, kPlotH);
  svg.text((kLeft + kRight) / 2.0, 22.0, "Elbow curve", "middle", 13.0);
  frame(svg, ax, ay, kLeft, kRight, kTop, kBottom, "number of clusters k", "distance measure d");

  std::vector<std::pair<double, double>> initial, reordered;
  for (const auto& p : curve) {
    const double x = ax.to_px(static_cast<double>(p.k), kLeft, kRight);
    initial.emplace_back(x, ay.to_px(p.d_initial, kBottom, kTop));
    if (p.d_reordered) reordered.emplace_back(x, ay.to_px(*p.d_reordered, kBottom, kTop));
  }
  series(svg, initial, cluster_palette()[4], "k-means");
  std::vector<std::pair<std::string, std::string>> entries{{"k-means", cluster_palette()[4]}};
  if (!reordered.empty()) {
    series(svg, reordered, cluster_palette()[5], "re-ordered", true);
    entries.emplace_back("re-ordered", cluster_palette()[5]);
  }
  legend(svg, kRight + 20.0, kTop + 10.0, entries);
  return svg.str();
}

std::string render_discovery_svg(const DiscoveryCurve& curve) {
  if (curve.entries.empty()) throw DataError("empty discovery curve");
  double xmin = static_cast<double>(curve.entries.front().max_leaves), xmax = xmin;
  for (const auto& e : curve.entries) {
    xmin = std::min(xmin, static_cast<double>(e.max_leaves));
    xmax = std::max(xmax, static_cast<double>(e.max_leaves));
  }
  const Axis ax = padded_axis(xmin, xmax), ay = padded_axis(0.0, 1.0);
  Svg svg(kPlotW, kPlotH);
  svg.text((kLeft + kRight) / 2.0, 22.0, "Interpretability vs. coverage", "middle", 13.0);
  frame(svg, ax, ay, kLeft, kRight, kTop, kBottom, "maximum number of leaves", "score");

  const auto make = [&](auto get) {
    std::vector<std::pair<double, double>> px;
    for (const auto& e : curve.entries) {
      px.emplace_back(ax.to_px(static_cast<double>(e.max_leaves), kLeft, kRight), ay.to_px(get(e), kBottom, kTop));
    }
    return px;
  };
  const auto& pal = cluster_palette();
  series(svg, make([](const DiscoveryEntry& e) { return e.interpretability; }), pal[4], "interpretability");
  series(svg, make([](const DiscoveryEntry& e) { return e.coverage; }), pal[5], "coverage");
  series(svg, make([](const DiscoveryEntry& e) { return e.cv_coverage; }), pal[2], "cv_coverage", true);
  legend(svg, kRight + 20.0, kTop + 10.0,
         {{"interpretability", pal[4]}, {"coverage", pal[5]}, {"cv coverage", pal[2]}});
  return svg.str();
}

std::string render_scatter_svg(std::span<const double> x, std::span<const double> y, std::span<const int> labels,
                               const std::string& x_name, const std::string& y_name) {
  if (x.empty()) throw DataError("empty scatter input");
  if (x.size() != y.size() || x.size() != labels.size()) throw DataError("scatter inputs differ in length");
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const Axis ax = padded_axis(*xlo, *xhi), ay = padded_axis(*ylo, *yhi);
  Svg svg(kPlotW, kPlotH);
  frame(svg, ax, ay, kLeft, kRight, kTop, kBottom, x_name, y_name);
  svg.add("<g class=\"points\">");
  for (std::size_t i = 0; i < x.size(); ++i) {
    svg.circle(ax.to_px(x[i], kLeft, kRight), ay.to_px(y[i], kBottom, kTop), 2.5, cluster_color(labels[i]),
               " fill-opacity=\"0.8\"");
  }
  svg.add("</g>");
  const std::set<int> distinct(labels.begin(), labels.end());
  std::vector<std::pair<std::string, std::string>> entries;
  for (int l : distinct) entries.emplace_back("Storyline " + std::to_string(l), cluster_color(l));
  legend(svg, kRight + 20.0, kTop + 10.0, entries);
  return svg.str();
}

std::string render_screening_svg(const ScreeningReport& report) {
  if (report.ranking.empty()) throw DataError("empty screening report");
  const bool by_range = report.statistic == ScreeningStatistic::Range;
  double top = 0.0;
  for (const auto& c : report.ranking) top = std::max(top, by_range ? c.range : c.variance);
  if (report.rule.kind == ScreeningRule::Kind::Threshold) top = std::max(top, report.rule.threshold);
  const Axis ay{0.0, top > 0.0 ? top * 1.05 : 1.0};

  const double n = static_cast<double>(report.ranking.size());
  const double width = std::max(kPlotW, kLeft + 40.0 + 28.0 * n);
  const double x1 = width - 40.0;
  Svg svg(width, kPlotH + 80.0);
  svg.text((kLeft + x1) / 2.0, 22.0, by_range ? "Range of variation" : "Variance", "middle", 13.0);
  svg.line(kLeft, kBottom, x1, kBottom, "#333333");
  svg.line(kLeft, kTop, kLeft, kBottom, "#333333");
  for (int t = 0; t <= 4; ++t) {
    const double v = ay.hi * t / 4.0;
    const double py = ay.to_px(v, kBottom, kTop);
    svg.line(kLeft - 4.0, py, kLeft, py, "#333333");
    svg.text(kLeft - 7.0, py + 3.5, label_num(v), "end", 10.0);
  }
  const double slot = (x1 - kLeft) / n;
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& c = report.ranking[i];
    const double v = by_range ? c.range : c.variance;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double py = ay.to_px(v, kBottom, kTop);
    svg.rect(x, py, slot * 0.7, kBottom - py, c.selected ? cluster_palette()[4] : "#bbbbbb",
             c.selected ? " class=\"selected\"" : " class=\"rejected\"");
    const double lx = x + slot * 0.35, ly = kBottom + 10.0;
    svg.text(lx, ly, c.name, "end", 10.0,
             " transform=\"rotate(-45 " + num(lx) + " " + num(ly) + ")\"");
  }
  if (report.rule.kind == ScreeningRule::Kind::Threshold) {
    const double py = ay.to_px(report.rule.threshold, kBottom, kTop);
    svg.line(kLeft, py, x1, py, "#000000", 1.2, " class=\"threshold\" stroke-dasharray=\"6,3\"");
  }
  return svg.str();
}

}  // namespace storyline
