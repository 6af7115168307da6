#include "storyline/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace storyline {

namespace {

__extension__ typedef unsigned __int128 u128;

// Below this many (rows x features) the thread start-up costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

bool in_parallel() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return true;
#endif
}

double entropy(std::span<const std::size_t> counts, std::size_t n) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

const char* to_string(Impurity impurity) noexcept {
  return impurity == Impurity::Gini ? "gini" : "entropy";
}

bool split_better(const SplitCandidate& a, const SplitCandidate& b, Impurity impurity) noexcept {
  if (impurity == Impurity::Gini) {
    return static_cast<u128>(a.score_num) * b.score_den > static_cast<u128>(b.score_num) * a.score_den;
  }
  return a.decrease > b.decrease;
}

double gini_decrease(std::uint64_t parent_sq, std::uint64_t left_sq, std::uint64_t right_sq,
                     std::size_t n, std::size_t n_left, std::size_t n_right) noexcept {
  // exact numerator and denominator, one rounding at the end while both fit in 53 bits
  const u128 num = (static_cast<u128>(left_sq) * n_right + static_cast<u128>(right_sq) * n_left) * n -
                   static_cast<u128>(parent_sq) * n_left * n_right;
  const u128 den = static_cast<u128>(n_left) * n_right * n * n;
  return static_cast<double>(num) / static_cast<double>(den);
}

double split_midpoint(double lo, double hi) noexcept {
  const double mid = 0.5 * (lo + hi);
  return mid < hi ? mid : lo;
}

namespace kernels {

void assign_nearest_serial(const Matrix& points, const Matrix& centers, std::span<int> labels,
                           std::span<double> sq_dist) {
  const std::size_t m = points.cols();
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto p = points.row(i);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const auto q = centers.row(c);
      double d = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = p[j] - q[j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    sq_dist[i] = best_d;
  }
}

void assign_nearest(const Matrix& points, const Matrix& centers, std::span<int> labels,
                    std::span<double> sq_dist) {
  const std::size_t n = points.rows();
  const std::size_t m = points.cols();
  const std::size_t k = centers.rows();
  const bool go_parallel = n * m * k >= kParallelWork && !in_parallel();
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto p = points.row(i);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const auto q = centers.row(c);
      double d = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double diff = p[j] - q[j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    sq_dist[i] = best_d;
  }
}

std::optional<SplitCandidate> best_split_on_feature(const Matrix& features, std::size_t feature,
                                                    std::span<const int> labels, std::size_t n_labels,
                                                    std::span<const std::size_t> members,
                                                    Impurity impurity) {
  const std::size_t n = members.size();
  if (n < 2) return std::nullopt;

  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(n);
  for (std::size_t r : members) sorted.emplace_back(features(r, feature), labels[r]);
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::size_t> right(n_labels, 0), left(n_labels, 0);
  for (const auto& [v, l] : sorted) ++right[static_cast<std::size_t>(l)];
  std::uint64_t parent_sq = 0;
  for (std::size_t c : right) parent_sq += static_cast<std::uint64_t>(c) * c;
  const double parent_entropy = impurity == Impurity::Entropy ? entropy(right, n) : 0.0;

  std::uint64_t left_sq = 0;
  std::uint64_t right_sq = parent_sq;
  std::optional<SplitCandidate> best;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto l = static_cast<std::size_t>(sorted[i].second);
    left_sq += 2 * left[l] + 1;
    right_sq -= 2 * right[l] - 1;
    ++left[l];
    --right[l];
    if (!(sorted[i].first < sorted[i + 1].first)) continue;

    const std::size_t n_left = i + 1;
    const std::size_t n_right = n - n_left;
    SplitCandidate cand;
    cand.feature = feature;
    cand.threshold = split_midpoint(sorted[i].first, sorted[i + 1].first);
    cand.left_count = n_left;
    if (impurity == Impurity::Gini) {
      // Strict improvement: (left_sq/nL + right_sq/nR) > parent_sq/n, exactly.
      const u128 lhs = (static_cast<u128>(left_sq) * n_right + static_cast<u128>(right_sq) * n_left) * n;
      const u128 rhs = static_cast<u128>(parent_sq) * n_left * n_right;
      if (lhs <= rhs) continue;
      cand.score_num = left_sq * n_right + right_sq * n_left;
      cand.score_den = static_cast<std::uint64_t>(n_left) * n_right;
      cand.decrease = gini_decrease(parent_sq, left_sq, right_sq, n, n_left, n_right);
    } else {
      const double wl = static_cast<double>(n_left) / static_cast<double>(n);
      const double wr = static_cast<double>(n_right) / static_cast<double>(n);
      cand.decrease = parent_entropy - wl * entropy(left, n_left) - wr * entropy(right, n_right);
      if (!(cand.decrease > 1e-12)) continue;
    }
    if (!best || split_better(cand, *best, impurity)) best = cand;
  }
  return best;
}

std::optional<SplitCandidate> best_split_serial(const Matrix& features, std::span<const int> labels,
                                                std::size_t n_labels,
                                                std::span<const std::size_t> members,
                                                Impurity impurity) {
  std::optional<SplitCandidate> best;
  for (std::size_t f = 0; f < features.cols(); ++f) {
    auto cand = best_split_on_feature(features, f, labels, n_labels, members, impurity);
    if (cand && (!best || split_better(*cand, *best, impurity))) best = cand;
  }
  return best;
}

std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         std::size_t n_labels, std::span<const std::size_t> members,
                                         Impurity impurity) {
  const std::size_t m = features.cols();
  const bool go_parallel = members.size() * m >= kParallelWork && m > 1 && !in_parallel();
  std::vector<std::optional<SplitCandidate>> per_feature(m);
  const auto cols = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 1) if (go_parallel)
  for (std::ptrdiff_t f = 0; f < cols; ++f) {
    per_feature[static_cast<std::size_t>(f)] = best_split_on_feature(
        features, static_cast<std::size_t>(f), labels, n_labels, members, impurity);
  }
  std::optional<SplitCandidate> best;
  for (const auto& cand : per_feature) {
    if (cand && (!best || split_better(*cand, *best, impurity))) best = cand;
  }
  return best;
}

}  // namespace kernels
}  // namespace storyline
