#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "storyline/scenario.hpp"

namespace storyline {

struct ScreeningRule {
  enum class Kind { Threshold, TopN };
  Kind kind = Kind::TopN;
  double threshold = 0.0;  ///< select statistic > threshold
  std::size_t top_n = 0;

  static ScreeningRule above(double value) { return {Kind::Threshold, value, 0}; }
  static ScreeningRule top(std::size_t n) { return {Kind::TopN, 0.0, n}; }
  std::string describe() const;
};

/// Parses "threshold=<v>" or "top=<n>".
ScreeningRule parse_screening_rule(const std::string& text);

enum class ScreeningStatistic { Range, Variance };

struct ScreeningCandidate {
  std::string name;
  std::string unit;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double variance = 0.0;
  bool selected = false;
};

struct ScreeningReport {
  std::vector<ScreeningCandidate> ranking;  ///< descending statistic, ties by name
  std::vector<std::string> selected;        ///< in ranking order
  ScreeningRule rule;
  ScreeningStatistic statistic = ScreeningStatistic::Range;
};

/// Ranks every column by its range (or variance) across scenarios and applies
/// `rule`. A threshold rule needs a single shared unit.
ScreeningReport screen(const ScenarioMatrix& flows, const ScreeningRule& rule,
                       ScreeningStatistic statistic = ScreeningStatistic::Range);

struct FiveNumber {
  double min, q1, median, q3, max;
};

/// Quantile by linear interpolation between order statistics, position q * (n - 1).
double quantile_inclusive(std::vector<double> values, double q);

std::vector<FiveNumber> quartiles(const ScenarioMatrix& flows);

}  // namespace storyline
