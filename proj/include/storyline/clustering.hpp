#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "storyline/matrix.hpp"

namespace storyline {

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<int> labels;
  Matrix centers;        ///< k x m, normalized space
  double distance = 0.0; ///< within-cluster sum of squared distances
  std::uint64_t seed = 0;
  std::size_t restarts_used = 0;
};

struct KMeansOptions {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  /// Extra initial center sets tried after the random restarts (index order).
  std::vector<Matrix> warm_starts;
};

/// Sum over clusters and member points of squared Euclidean distance to the center.
double distance_measure(const Matrix& points, std::span<const int> labels, const Matrix& centers);

/// Cluster means for the given labels. Throws if any label in [0, k) is unused.
Matrix cluster_means(const Matrix& points, std::span<const int> labels, std::size_t k);

/// One Lloyd run from explicit initial centers. `trace`, when given, receives
/// the distance measure after every iteration.
ClusterAssignment lloyd(const Matrix& points, Matrix initial_centers, std::size_t max_iter,
                        double tol, std::vector<double>* trace = nullptr);

/// Greedy k-means++ seeding (2 + ln k candidate draws per center).
Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, std::uint64_t seed);

/// Best of `restarts` seeded k-means++/Lloyd runs plus any warm starts.
/// Ties in distance keep the lower run index. Runs execute concurrently.
ClusterAssignment kmeans(const Matrix& points, const KMeansOptions& options);

/// Warm start for k+1 clusters: the k centers of `previous` plus the point
/// farthest from its own center.
Matrix grow_centers(const Matrix& points, const ClusterAssignment& previous);

struct ElbowPoint {
  std::size_t k = 0;
  double d_initial = 0.0;
  std::optional<double> d_reordered;
};

struct ElbowOptions {
  std::vector<std::size_t> k_values;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  /// Chain each k with a warm start from the k-1 solution. Makes d non-increasing
  /// along consecutive k values.
  bool warm_chain = true;
};

/// Receives the clustering for one k and returns the post-reorder distance,
/// or nullopt when reordering is not possible for that k.
using ReorderHook = std::function<std::optional<double>(const ClusterAssignment&)>;

struct ElbowRun {
  std::vector<ElbowPoint> points;
  std::vector<ClusterAssignment> assignments;  ///< same order as points
};

ElbowRun elbow_curve(const Matrix& points, const ElbowOptions& options,
                     const ReorderHook& reorder_hook = {});

/// Ratio of the d drop entering `k` to the d drop leaving it; large values mark an elbow.
std::optional<double> elbow_slope_ratio(std::span<const ElbowPoint> curve, std::size_t k);

}  // namespace storyline
