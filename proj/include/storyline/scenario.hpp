#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "storyline/matrix.hpp"

namespace storyline {

enum class OutputKind { OutputOfInterest, UncertainInput, Flow };

const char* to_string(OutputKind kind) noexcept;
/// Accepts the metadata spellings "ooi", "theta", "flow".
OutputKind parse_output_kind(const std::string& text);

struct OutputDescriptor {
  std::string name;
  std::string unit = "unitless";
  OutputKind kind = OutputKind::OutputOfInterest;
  bool categorical = false;

  bool operator==(const OutputDescriptor&) const = default;
};

/// Column-oriented table as it comes out of a reader, before validation.
struct RawTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // columns[c][r]
  std::vector<std::string> row_ids;          // empty means "use 1-based row numbers"
  std::vector<OutputDescriptor> descriptors; // empty means defaults derived from names
};

struct Range {
  double min = 0.0;
  double max = 0.0;
  double width() const noexcept { return max - min; }
  bool contains(const Range& inner) const noexcept {
    return inner.min >= min && inner.max <= max;
  }
  bool operator==(const Range&) const = default;
};

/// N scenarios x m named outputs. Immutable once built.
class ScenarioMatrix {
 public:
  ScenarioMatrix(std::vector<OutputDescriptor> descriptors, Matrix values,
                 std::vector<std::string> scenario_ids);

  std::size_t scenarios() const noexcept { return values_.rows(); }
  std::size_t outputs() const noexcept { return values_.cols(); }
  const std::vector<OutputDescriptor>& descriptors() const noexcept { return descriptors_; }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& scenario_ids() const noexcept { return ids_; }
  std::vector<std::string> names() const;
  std::optional<std::size_t> index_of(const std::string& name) const;

 private:
  std::vector<OutputDescriptor> descriptors_;
  Matrix values_;
  std::vector<std::string> ids_;
};

/// Validates a raw table: finite values, N >= 2, m >= 1, unique non-empty
/// names, and no constant column. Column order is preserved.
ScenarioMatrix build_scenario_matrix(const RawTable& raw);

/// Uncertain inputs theta, aligned row-for-row with a ScenarioMatrix.
class UncertaintyMatrix {
 public:
  UncertaintyMatrix(std::vector<OutputDescriptor> descriptors, Matrix values,
                    std::vector<std::string> scenario_ids);

  std::size_t scenarios() const noexcept { return values_.rows(); }
  std::size_t inputs() const noexcept { return values_.cols(); }
  const std::vector<OutputDescriptor>& descriptors() const noexcept { return descriptors_; }
  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& scenario_ids() const noexcept { return ids_; }
  std::vector<std::string> names() const;
  bool categorical(std::size_t column) const { return descriptors_.at(column).categorical; }

  /// Throws DataError unless ids match `scenarios` one-for-one in order.
  void check_aligned(const ScenarioMatrix& scenarios) const;

 private:
  std::vector<OutputDescriptor> descriptors_;
  Matrix values_;
  std::vector<std::string> ids_;
};

UncertaintyMatrix build_uncertainty_matrix(const RawTable& raw);

/// Per-column min-max scaling.
class Normalization {
 public:
  explicit Normalization(std::vector<Range> ranges);

  std::size_t size() const noexcept { return ranges_.size(); }
  const std::vector<Range>& ranges() const noexcept { return ranges_; }

  double normalize(std::size_t column, double value) const noexcept {
    const Range& r = ranges_[column];
    return (value - r.min) / (r.max - r.min);
  }
  double denormalize(std::size_t column, double value) const noexcept {
    const Range& r = ranges_[column];
    return r.min + value * (r.max - r.min);
  }

 private:
  std::vector<Range> ranges_;
};

struct OutOfRangeValue {
  std::size_t row;
  std::size_t column;
  double value;
};

struct NormalizedMatrix {
  Matrix values;
  std::vector<OutOfRangeValue> warnings;
};

Normalization fit_normalization(const ScenarioMatrix& matrix);
std::vector<Range> column_ranges(const Matrix& values);

/// Maps every value to (v - min) / (max - min). Values outside the fitted
/// range are kept as-is and listed in `warnings`.
NormalizedMatrix apply_normalization(const Matrix& values, const Normalization& norm);

enum class LockLevel { Open, Partial, Locked };

const char* to_string(LockLevel level) noexcept;
LockLevel parse_lock_level(const std::string& text);

struct LockThresholds {
  double partial = 2.0 / 3.0;
  double locked = 1.0 / 3.0;

  void validate() const;
};

LockLevel lock_level(double range_ratio, const LockThresholds& thresholds) noexcept;

struct NodeSummary {
  std::size_t count = 0;
  std::vector<Range> ranges;
  double sigma = 0.0;
  std::vector<LockLevel> locks;
};

/// Fraction of the initial decision space spanned by `ranges`:
/// prod_j (node width_j / initial width_j), evaluated as a product of ratios.
double decision_space_fraction(std::span<const Range> ranges, std::span<const Range> initial);

/// Ranges, sigma, and per-output lock levels for the scenarios in `member_rows`.
NodeSummary node_summary(const Matrix& values, std::span<const std::size_t> member_rows,
                         std::span<const Range> initial_ranges, const LockThresholds& thresholds);

}  // namespace storyline
