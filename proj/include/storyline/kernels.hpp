#pragma once

// Hot loops of the pipeline. Each kernel exists twice: a plain serial
// reference and an OpenMP version. The two must agree bit-for-bit; the
// parallel versions only split independent work and reduce in a fixed order.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "storyline/matrix.hpp"

namespace storyline {

enum class Impurity { Gini, Entropy };

const char* to_string(Impurity impurity) noexcept;

/// A candidate axis-aligned split: rows with value <= threshold go left.
struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;  ///< parent impurity minus size-weighted child impurity
  std::size_t left_count = 0;
  // Exact Gini ranking key: sum_l cL^2 / nL + sum_l cR^2 / nR as num / den.
  std::uint64_t score_num = 0;
  std::uint64_t score_den = 1;
};

/// True if `a` ranks strictly above `b` (same node). Gini compares the exact
/// rational key, entropy compares the decrease.
bool split_better(const SplitCandidate& a, const SplitCandidate& b, Impurity impurity) noexcept;

/// Gini decrease from integer label statistics: parent sum of squared counts,
/// left/right sums of squared counts, and the three sizes.
double gini_decrease(std::uint64_t parent_sq, std::uint64_t left_sq, std::uint64_t right_sq,
                     std::size_t n, std::size_t n_left, std::size_t n_right) noexcept;

/// Midpoint between consecutive distinct sorted values, kept strictly below `hi`.
double split_midpoint(double lo, double hi) noexcept;

namespace kernels {

/// Nearest center (squared Euclidean, ties to the lowest index) for every row.
void assign_nearest_serial(const Matrix& points, const Matrix& centers, std::span<int> labels,
                           std::span<double> sq_dist);
void assign_nearest(const Matrix& points, const Matrix& centers, std::span<int> labels,
                    std::span<double> sq_dist);

/// Best threshold on a single feature among `members`.
std::optional<SplitCandidate> best_split_on_feature(const Matrix& features, std::size_t feature,
                                                    std::span<const int> labels, std::size_t n_labels,
                                                    std::span<const std::size_t> members,
                                                    Impurity impurity);

/// Best split over all features; ties resolve to the lower feature index.
std::optional<SplitCandidate> best_split_serial(const Matrix& features, std::span<const int> labels,
                                                std::size_t n_labels,
                                                std::span<const std::size_t> members,
                                                Impurity impurity);
std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         std::size_t n_labels, std::span<const std::size_t> members,
                                         Impurity impurity);

}  // namespace kernels
}  // namespace storyline
