#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "storyline/clustering.hpp"
#include "storyline/discovery.hpp"
#include "storyline/scenario.hpp"
#include "storyline/screening.hpp"

namespace storyline {

/// Okabe-Ito palette; cluster label i uses entry i % 8 in every figure.
const std::array<const char*, 8>& cluster_palette() noexcept;
const char* cluster_color(int label) noexcept;

struct RadarStyle {
  double size = 420.0;
  double radius = 140.0;
  std::string title;
  int label = -1;  ///< colors the band; -1 draws it grey (internal nodes)
};

/// Radar of one tree node: one axis per output spanning [0, 1] of its initial
/// range, a band between the node's min and max polygons, a lock glyph at each
/// axis tip and the sigma value. Fewer than 3 outputs fall back to range bars.
std::string render_radar_svg(const NodeSummary& summary, std::span<const OutputDescriptor> descriptors,
                             std::span<const Range> initial_ranges, const RadarStyle& style = {});

std::string render_elbow_svg(std::span<const ElbowPoint> curve);
std::string render_discovery_svg(const DiscoveryCurve& curve);
std::string render_scatter_svg(std::span<const double> x, std::span<const double> y, std::span<const int> labels,
                               const std::string& x_name, const std::string& y_name);
std::string render_screening_svg(const ScreeningReport& report);

}  // namespace storyline
