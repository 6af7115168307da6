#include "storyline/clustering.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "storyline/error.hpp"
#include "storyline/kernels.hpp"
#include "storyline/random.hpp"

namespace storyline {

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    d += diff * diff;
  }
  return d;
}

// Moves, for each empty cluster in index order, the point farthest from its
// center (taken only from clusters that keep at least one member) into it.
void repair_empty_clusters(std::span<int> labels, std::span<double> sq_dist, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t pick = labels.size();
    double pick_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (counts[static_cast<std::size_t>(labels[i])] < 2) continue;
      if (sq_dist[i] > pick_d) {
        pick_d = sq_dist[i];
        pick = i;
      }
    }
    if (pick == labels.size()) throw InvariantError("cannot repair empty cluster: k exceeds point count");
    --counts[static_cast<std::size_t>(labels[pick])];
    labels[pick] = static_cast<int>(c);
    sq_dist[pick] = 0.0;
    ++counts[c];
  }
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1) throw UsageError("k must be at least 1");
  if (k > n) throw UsageError("k = " + std::to_string(k) + " exceeds the number of scenarios (" +
                              std::to_string(n) + ")");
}

}  // namespace

double distance_measure(const Matrix& points, std::span<const int> labels, const Matrix& centers) {
  if (labels.size() != points.rows()) throw InvariantError("label count does not match point count");
  if (centers.cols() != points.cols()) throw InvariantError("center dimension does not match points");
  double d = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= centers.rows()) {
      throw DataError("label " + std::to_string(l) + " at row " + std::to_string(i) + " out of range");
    }
    d += sq_distance(points.row(i), centers.row(static_cast<std::size_t>(l)));
  }
  return d;
}

Matrix cluster_means(const Matrix& points, std::span<const int> labels, std::size_t k) {
  Matrix sums(k, points.cols(), 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= k) {
      throw DataError("label " + std::to_string(l) + " at row " + std::to_string(i) + " out of range");
    }
    const auto c = static_cast<std::size_t>(l);
    ++counts[c];
    for (std::size_t j = 0; j < points.cols(); ++j) sums(c, j) += points(i, j);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) throw DataError("cluster " + std::to_string(c) + " has no members");
    for (std::size_t j = 0; j < points.cols(); ++j) sums(c, j) /= static_cast<double>(counts[c]);
  }
  return sums;
}

ClusterAssignment lloyd(const Matrix& points, Matrix centers, std::size_t max_iter, double tol,
                        std::vector<double>* trace) {
  const std::size_t n = points.rows();
  const std::size_t k = centers.rows();
  check_k(k, n);
  if (centers.cols() != points.cols()) throw UsageError("initial centers have the wrong dimension");

  std::vector<int> labels(n, -1), next(n);
  std::vector<double> sq_dist(n);
  const std::size_t iterations = std::max<std::size_t>(max_iter, 1);
  for (std::size_t it = 0; it < iterations; ++it) {
    kernels::assign_nearest(points, centers, next, sq_dist);
    repair_empty_clusters(next, sq_dist, k);
    const bool changed = next != labels;
    labels = next;
    Matrix updated = cluster_means(points, labels, k);
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift += sq_distance(updated.row(c), centers.row(c));
    centers = std::move(updated);
    if (trace) trace->push_back(distance_measure(points, labels, centers));
    if (!changed || shift < tol) break;
  }

  ClusterAssignment out;
  out.k = k;
  out.distance = distance_measure(points, labels, centers);
  out.labels = std::move(labels);
  out.centers = std::move(centers);
  out.restarts_used = 1;
  return out;
}

Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, std::uint64_t seed) {
  const std::size_t n = points.rows();
  check_k(k, n);
  Rng rng(seed);
  Matrix centers(k, points.cols());
  const auto copy_row = [&](std::size_t c, std::size_t i) {
    for (std::size_t j = 0; j < points.cols(); ++j) centers(c, j) = points(i, j);
  };

  const std::size_t first = static_cast<std::size_t>(rng.below(n));
  copy_row(0, first);
  std::vector<double> closest(n);
  double potential = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    closest[i] = sq_distance(points.row(i), points.row(first));
    potential += closest[i];
  }

  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<double> candidate_closest(n), best_closest(n);
  for (std::size_t c = 1; c < k; ++c) {
    if (!(potential > 0.0)) {
      copy_row(c, static_cast<std::size_t>(rng.below(n)));
      continue;
    }
    std::size_t best_index = 0;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const double target = rng.uniform() * potential;
      double cumulative = 0.0;
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += closest[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      double cand_potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_closest[i] = std::min(closest[i], sq_distance(points.row(i), points.row(pick)));
        cand_potential += candidate_closest[i];
      }
      if (cand_potential < best_potential) {
        best_potential = cand_potential;
        best_index = pick;
        best_closest.swap(candidate_closest);
      }
    }
    copy_row(c, best_index);
    closest.swap(best_closest);
    potential = best_potential;
  }
  return centers;
}

ClusterAssignment kmeans(const Matrix& points, const KMeansOptions& options) {
  check_k(options.k, points.rows());
  for (const auto& w : options.warm_starts) {
    if (w.rows() != options.k || w.cols() != points.cols()) {
      throw UsageError("warm start centers must be k x m");
    }
  }
  const std::size_t runs = options.restarts + options.warm_starts.size();
  if (runs == 0) throw UsageError("kmeans needs at least one restart");

  std::vector<ClusterAssignment> results(runs);
  std::vector<std::exception_ptr> failures(runs);
  const auto total = static_cast<std::ptrdiff_t>(runs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t rr = 0; rr < total; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    try {
      Matrix init = r < options.restarts
                        ? kmeans_plus_plus(points, options.k, derive_seed(options.seed, r))
                        : options.warm_starts[r - options.restarts];
      results[r] = lloyd(points, std::move(init), options.max_iter, options.tol);
    } catch (...) {
      failures[r] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r) {
    if (results[r].distance < results[best].distance) best = r;
  }
  ClusterAssignment out = std::move(results[best]);
  out.seed = options.seed;
  out.restarts_used = runs;
  return out;
}

Matrix grow_centers(const Matrix& points, const ClusterAssignment& previous) {
  const std::size_t k = previous.centers.rows();
  Matrix centers(k + 1, points.cols());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < points.cols(); ++j) centers(c, j) = previous.centers(c, j);
  }
  std::size_t far = 0;
  double far_d = -1.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double d =
        sq_distance(points.row(i), previous.centers.row(static_cast<std::size_t>(previous.labels[i])));
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  for (std::size_t j = 0; j < points.cols(); ++j) centers(k, j) = points(far, j);
  return centers;
}

ElbowRun elbow_curve(const Matrix& points, const ElbowOptions& options, const ReorderHook& reorder_hook) {
  if (options.k_values.empty()) throw UsageError("empty k range");
  for (std::size_t k : options.k_values) check_k(k, points.rows());

  ElbowRun run;
  for (std::size_t idx = 0; idx < options.k_values.size(); ++idx) {
    KMeansOptions km;
    km.k = options.k_values[idx];
    km.seed = options.seed;
    km.restarts = options.restarts;
    km.max_iter = options.max_iter;
    km.tol = options.tol;
    if (options.warm_chain && idx > 0 && run.assignments.back().k + 1 == km.k) {
      km.warm_starts.push_back(grow_centers(points, run.assignments.back()));
    }
    run.assignments.push_back(kmeans(points, km));
    run.points.push_back({km.k, run.assignments.back().distance, std::nullopt});
  }

  if (reorder_hook) {
    const auto count = static_cast<std::ptrdiff_t>(run.points.size());
    std::vector<std::exception_ptr> failures(run.points.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      try {
        run.points[i].d_reordered = reorder_hook(run.assignments[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  return run;
}

std::optional<double> elbow_slope_ratio(std::span<const ElbowPoint> curve, std::size_t k) {
  for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
    if (curve[i].k != k) continue;
    if (curve[i - 1].k + 1 != k || curve[i + 1].k != k + 1) return std::nullopt;
    const double before = curve[i - 1].d_initial - curve[i].d_initial;
    const double after = curve[i].d_initial - curve[i + 1].d_initial;
    if (after <= 0.0) {
      return before > 0.0 ? std::optional(std::numeric_limits<double>::infinity()) : std::nullopt;
    }
    return before / after;
  }
  return std::nullopt;
}

}  // namespace storyline
