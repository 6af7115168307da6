#include "storyline/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "storyline/error.hpp"

namespace storyline {

const char* to_string(OutputKind kind) noexcept {
  switch (kind) {
    case OutputKind::OutputOfInterest: return "ooi";
    case OutputKind::UncertainInput: return "theta";
    case OutputKind::Flow: return "flow";
  }
  return "ooi";
}

OutputKind parse_output_kind(const std::string& text) {
  if (text == "ooi") return OutputKind::OutputOfInterest;
  if (text == "theta") return OutputKind::UncertainInput;
  if (text == "flow") return OutputKind::Flow;
  throw DataError("unknown column kind '" + text + "' (expected ooi, theta or flow)");
}

const char* to_string(LockLevel level) noexcept {
  switch (level) {
    case LockLevel::Open: return "open";
    case LockLevel::Partial: return "partial";
    case LockLevel::Locked: return "locked";
  }
  return "open";
}

LockLevel parse_lock_level(const std::string& text) {
  if (text == "open") return LockLevel::Open;
  if (text == "partial") return LockLevel::Partial;
  if (text == "locked") return LockLevel::Locked;
  throw DataError("unknown lock level '" + text + "'");
}

namespace {

struct Validated {
  std::vector<OutputDescriptor> descriptors;
  Matrix values;
  std::vector<std::string> ids;
};

Validated validate_table(const RawTable& raw, OutputKind default_kind) {
  const std::size_t m = raw.names.size();
  if (m == 0) throw DataError("table has no columns");
  if (raw.columns.size() != m) {
    throw DataError("table has " + std::to_string(m) + " column names but " +
                    std::to_string(raw.columns.size()) + " columns");
  }
  const std::size_t n = raw.columns.front().size();
  for (std::size_t c = 0; c < m; ++c) {
    if (raw.columns[c].size() != n) {
      throw DataError("column '" + raw.names[c] + "' has " + std::to_string(raw.columns[c].size()) +
                      " rows, expected " + std::to_string(n));
    }
  }
  if (n < 2) throw DataError("need at least 2 scenarios, got " + std::to_string(n));

  std::set<std::string> seen;
  for (const auto& name : raw.names) {
    if (name.empty()) throw DataError("empty column name");
    if (!seen.insert(name).second) throw DataError("duplicate column name '" + name + "'");
  }

  Validated out;
  if (raw.descriptors.empty()) {
    for (const auto& name : raw.names) out.descriptors.push_back({name, "unitless", default_kind, false});
  } else {
    if (raw.descriptors.size() != m) throw DataError("descriptor count does not match column count");
    out.descriptors = raw.descriptors;
    for (std::size_t c = 0; c < m; ++c) {
      if (out.descriptors[c].name != raw.names[c]) {
        throw DataError("descriptor '" + out.descriptors[c].name + "' does not match column '" +
                        raw.names[c] + "'");
      }
    }
  }

  out.values = Matrix(n, m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const double v = raw.columns[c][r];
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite value at row " << r << ", column " << c << " ('" << raw.names[c] << "')";
        throw DataError(msg.str());
      }
      out.values(r, c) = v;
    }
  }

  for (std::size_t c = 0; c < m; ++c) {
    const auto [lo, hi] = std::minmax_element(raw.columns[c].begin(), raw.columns[c].end());
    if (!(*hi > *lo)) {
      std::ostringstream msg;
      msg << "constant column '" << raw.names[c] << "' (every value is " << *lo
          << "); drop it first, the screen command ranks columns by range";
      throw DataError(msg.str());
    }
  }

  if (raw.row_ids.empty()) {
    out.ids.reserve(n);
    for (std::size_t r = 0; r < n; ++r) out.ids.push_back(std::to_string(r + 1));
  } else {
    if (raw.row_ids.size() != n) throw DataError("row id count does not match row count");
    out.ids = raw.row_ids;
  }
  return out;
}

}  // namespace

ScenarioMatrix::ScenarioMatrix(std::vector<OutputDescriptor> descriptors, Matrix values,
                               std::vector<std::string> scenario_ids)
    : descriptors_(std::move(descriptors)), values_(std::move(values)), ids_(std::move(scenario_ids)) {
  if (descriptors_.size() != values_.cols()) throw DataError("descriptor count does not match column count");
  if (ids_.size() != values_.rows()) throw DataError("scenario id count does not match row count");
}

std::vector<std::string> ScenarioMatrix::names() const {
  std::vector<std::string> out;
  for (const auto& d : descriptors_) out.push_back(d.name);
  return out;
}

std::optional<std::size_t> ScenarioMatrix::index_of(const std::string& name) const {
  for (std::size_t c = 0; c < descriptors_.size(); ++c) {
    if (descriptors_[c].name == name) return c;
  }
  return std::nullopt;
}

ScenarioMatrix build_scenario_matrix(const RawTable& raw) {
  auto v = validate_table(raw, OutputKind::OutputOfInterest);
  return ScenarioMatrix(std::move(v.descriptors), std::move(v.values), std::move(v.ids));
}

UncertaintyMatrix::UncertaintyMatrix(std::vector<OutputDescriptor> descriptors, Matrix values,
                                     std::vector<std::string> scenario_ids)
    : descriptors_(std::move(descriptors)), values_(std::move(values)), ids_(std::move(scenario_ids)) {
  if (descriptors_.size() != values_.cols()) throw DataError("descriptor count does not match column count");
  if (ids_.size() != values_.rows()) throw DataError("scenario id count does not match row count");
  for (std::size_t c = 0; c < descriptors_.size(); ++c) {
    if (!descriptors_[c].categorical) continue;
    for (std::size_t r = 0; r < values_.rows(); ++r) {
      const double v = values_(r, c);
      if (v < 0.0 || v != std::floor(v)) {
        std::ostringstream msg;
        msg << "categorical column '" << descriptors_[c].name << "' has non-integer or negative code "
            << v << " at row " << r;
        throw DataError(msg.str());
      }
    }
  }
}

std::vector<std::string> UncertaintyMatrix::names() const {
  std::vector<std::string> out;
  for (const auto& d : descriptors_) out.push_back(d.name);
  return out;
}

void UncertaintyMatrix::check_aligned(const ScenarioMatrix& scenarios) const {
  if (scenarios.scenarios() != this->scenarios()) {
    throw DataError("uncertainty matrix has " + std::to_string(this->scenarios()) +
                    " rows but the scenario matrix has " + std::to_string(scenarios.scenarios()));
  }
  for (std::size_t r = 0; r < ids_.size(); ++r) {
    if (ids_[r] != scenarios.scenario_ids()[r]) {
      throw DataError("scenario id mismatch at row " + std::to_string(r) + ": '" + ids_[r] + "' vs '" +
                      scenarios.scenario_ids()[r] + "'");
    }
  }
}

UncertaintyMatrix build_uncertainty_matrix(const RawTable& raw) {
  auto v = validate_table(raw, OutputKind::UncertainInput);
  return UncertaintyMatrix(std::move(v.descriptors), std::move(v.values), std::move(v.ids));
}

Normalization::Normalization(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
  for (std::size_t c = 0; c < ranges_.size(); ++c) {
    if (!(ranges_[c].max > ranges_[c].min)) {
      throw DataError("normalization range for column " + std::to_string(c) + " has zero width");
    }
  }
}

std::vector<Range> column_ranges(const Matrix& values) {
  std::vector<Range> out(values.cols());
  for (std::size_t c = 0; c < values.cols(); ++c) {
    Range r{values(0, c), values(0, c)};
    for (std::size_t i = 1; i < values.rows(); ++i) {
      r.min = std::min(r.min, values(i, c));
      r.max = std::max(r.max, values(i, c));
    }
    out[c] = r;
  }
  return out;
}

Normalization fit_normalization(const ScenarioMatrix& matrix) {
  return Normalization(column_ranges(matrix.values()));
}

NormalizedMatrix apply_normalization(const Matrix& values, const Normalization& norm) {
  if (values.cols() != norm.size()) {
    throw DataError("normalization has " + std::to_string(norm.size()) + " columns, matrix has " +
                    std::to_string(values.cols()));
  }
  NormalizedMatrix out{Matrix(values.rows(), values.cols()), {}};
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      const Range& range = norm.ranges()[c];
      if (v < range.min || v > range.max) out.warnings.push_back({r, c, v});
      out.values(r, c) = norm.normalize(c, v);
    }
  }
  return out;
}

void LockThresholds::validate() const {
  if (!(locked >= 0.0 && locked < partial && partial <= 1.0)) {
    throw UsageError("lock thresholds need 0 <= locked < partial <= 1");
  }
}

LockLevel lock_level(double range_ratio, const LockThresholds& thresholds) noexcept {
  if (range_ratio > thresholds.partial) return LockLevel::Open;
  if (range_ratio > thresholds.locked) return LockLevel::Partial;
  return LockLevel::Locked;
}

double decision_space_fraction(std::span<const Range> ranges, std::span<const Range> initial) {
  if (ranges.size() != initial.size()) throw InvariantError("range count mismatch in sigma");
  double sigma = 1.0;
  for (std::size_t j = 0; j < ranges.size(); ++j) sigma *= ranges[j].width() / initial[j].width();
  return sigma;
}

NodeSummary node_summary(const Matrix& values, std::span<const std::size_t> member_rows,
                         std::span<const Range> initial_ranges, const LockThresholds& thresholds) {
  if (member_rows.empty()) throw InvariantError("node summary of an empty member set");
  if (initial_ranges.size() != values.cols()) throw InvariantError("initial range count mismatch");
  for (const auto& r : initial_ranges) {
    if (!(r.width() > 0.0)) throw InvariantError("initial range with zero width");
  }

  NodeSummary s;
  s.count = member_rows.size();
  s.ranges.resize(values.cols());
  for (std::size_t c = 0; c < values.cols(); ++c) {
    Range r{values(member_rows[0], c), values(member_rows[0], c)};
    for (std::size_t i : member_rows) {
      r.min = std::min(r.min, values(i, c));
      r.max = std::max(r.max, values(i, c));
    }
    s.ranges[c] = r;
  }
  s.sigma = decision_space_fraction(s.ranges, initial_ranges);
  s.locks.reserve(values.cols());
  for (std::size_t c = 0; c < values.cols(); ++c) {
    s.locks.push_back(lock_level(s.ranges[c].width() / initial_ranges[c].width(), thresholds));
  }
  return s;
}

}  // namespace storyline
