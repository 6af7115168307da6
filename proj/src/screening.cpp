#include "storyline/screening.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "storyline/error.hpp"

namespace storyline {

std::string ScreeningRule::describe() const {
  std::ostringstream out;
  if (kind == Kind::Threshold) {
    out << "threshold=" << threshold;
  } else {
    out << "top=" << top_n;
  }
  return out.str();
}

ScreeningRule parse_screening_rule(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("screening rule must be threshold=<v> or top=<n>, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  char* end = nullptr;
  if (key == "threshold") {
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || !std::isfinite(v)) throw UsageError("bad threshold '" + value + "'");
    return ScreeningRule::above(v);
  }
  if (key == "top") {
    const long n = std::strtol(value.c_str(), &end, 10);
    if (value.empty() || *end != '\0' || n < 1) throw UsageError("bad top-n '" + value + "'");
    return ScreeningRule::top(static_cast<std::size_t>(n));
  }
  throw UsageError("unknown screening rule '" + key + "'");
}

ScreeningReport screen(const ScenarioMatrix& flows, const ScreeningRule& rule, ScreeningStatistic statistic) {
  const auto& desc = flows.descriptors();
  if (rule.kind == ScreeningRule::Kind::Threshold) {
    for (const auto& d : desc) {
      if (d.unit != desc.front().unit) {
        throw DataError("threshold screening needs one shared unit, found '" + desc.front().unit + "' and '" +
                        d.unit + "'");
      }
    }
  }

  ScreeningReport report;
  report.rule = rule;
  report.statistic = statistic;
  const auto ranges = column_ranges(flows.values());
  const double n = static_cast<double>(flows.scenarios());
  for (std::size_t c = 0; c < flows.outputs(); ++c) {
    ScreeningCandidate cand{desc[c].name, desc[c].unit, ranges[c].min, ranges[c].max, ranges[c].width(), 0.0, false};
    // Sorted so the sum does not depend on row order.
    auto column = flows.values().column(c);
    std::sort(column.begin(), column.end());
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    cand.variance = ss / n;
    report.ranking.push_back(std::move(cand));
  }

  const auto stat = [statistic](const ScreeningCandidate& c) {
    return statistic == ScreeningStatistic::Range ? c.range : c.variance;
  };
  std::sort(report.ranking.begin(), report.ranking.end(), [&](const auto& a, const auto& b) {
    if (stat(a) != stat(b)) return stat(a) > stat(b);
    return a.name < b.name;
  });

  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    auto& cand = report.ranking[i];
    cand.selected = rule.kind == ScreeningRule::Kind::Threshold ? stat(cand) > rule.threshold : i < rule.top_n;
    if (cand.selected) report.selected.push_back(cand.name);
  }
  return report;
}

double quantile_inclusive(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<FiveNumber> quartiles(const ScenarioMatrix& flows) {
  std::vector<FiveNumber> out;
  for (std::size_t c = 0; c < flows.outputs(); ++c) {
    const auto col = flows.values().column(c);
    out.push_back({quantile_inclusive(col, 0.0), quantile_inclusive(col, 0.25), quantile_inclusive(col, 0.5),
                   quantile_inclusive(col, 0.75), quantile_inclusive(col, 1.0)});
  }
  return out;
}

}  // namespace storyline
