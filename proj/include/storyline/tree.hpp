#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "storyline/clustering.hpp"
#include "storyline/error.hpp"
#include "storyline/kernels.hpp"
#include "storyline/matrix.hpp"
#include "storyline/scenario.hpp"

namespace storyline {

/// What a tree is trained on. `routing` holds the values splits are decided
/// on; `report` holds the same rows in reporting units (raw outputs) and is
/// what node summaries are computed from.
struct FeatureSpace {
  Matrix routing;
  Matrix report;
  std::vector<OutputDescriptor> descriptors;
  std::optional<Normalization> normalization;  ///< routing -> report, when they differ
  std::vector<Range> initial_ranges;           ///< column ranges of `report`

  std::size_t rows() const noexcept { return routing.rows(); }
  std::size_t features() const noexcept { return routing.cols(); }
  std::vector<std::string> names() const;
};

/// Normalized routing, raw reporting.
FeatureSpace make_feature_space(const ScenarioMatrix& scenarios);
/// Routing and reporting both on raw theta values.
FeatureSpace make_feature_space(const UncertaintyMatrix& theta);
/// Plain matrix; features are named f0, f1, ...
FeatureSpace make_feature_space(const Matrix& values);

enum class NodeKind { Internal, Leaf };

struct TreeNode {
  std::size_t id = 0;
  NodeKind kind = NodeKind::Leaf;
  std::size_t feature = 0;       ///< internal only
  double threshold = 0.0;        ///< routing units; internal only
  double threshold_raw = 0.0;    ///< reporting units; internal only
  int label = -1;                ///< majority label; the storyline for leaves
  std::size_t left = 0;          ///< value <= threshold
  std::size_t right = 0;         ///< value > threshold
  std::size_t member_count = 0;
  NodeSummary summary;

  bool is_leaf() const noexcept { return kind == NodeKind::Leaf; }
};

struct StorylineTree {
  std::vector<TreeNode> nodes;
  std::size_t root = 0;
  std::size_t max_leaves = 1;
  std::vector<OutputDescriptor> features;

  std::size_t leaf_count() const;
  std::size_t leaf_for(std::span<const double> routing_values) const;
  std::vector<std::string> feature_names() const;
};

struct TreeOptions {
  Impurity impurity = Impurity::Gini;
  LockThresholds locks;
};

/// Best split among `members` (all rows if empty). Exhaustive over features and
/// midpoint thresholds; nullopt when no split strictly reduces impurity.
std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         std::span<const std::size_t> members = {},
                                         Impurity impurity = Impurity::Gini);

/// Best-first growth up to `max_leaves`. The frontier leaf with the largest
/// size-weighted impurity decrease is expanded next; ties go to the lower node
/// id. `rows` restricts training to a subset (all rows if empty).
StorylineTree fit_tree(const FeatureSpace& space, std::span<const int> labels, std::size_t max_leaves,
                       const TreeOptions& options = {}, std::span<const std::size_t> rows = {});
StorylineTree fit_tree(const Matrix& features, std::span<const int> labels, std::size_t max_leaves,
                       const TreeOptions& options = {});

/// Root-to-leaf descent on routing values; value == threshold goes left.
int predict(const StorylineTree& tree, std::span<const double> routing_values);
std::vector<int> predict_all(const StorylineTree& tree, const Matrix& routing);

/// Thrown by reorder when a cluster ends up with no members.
class VanishedClusterError : public DataError {
 public:
  explicit VanishedClusterError(const std::string& what) : DataError(what) {}
};

struct ReorderResult {
  std::vector<int> labels_before;
  std::vector<int> labels_after;
  double d_before = 0.0;
  double d_after = 0.0;
  std::size_t moved_count = 0;
  Matrix centers_after;
};

/// Relabels every point with the tree's prediction and recomputes the
/// distance measure with centers at the new cluster means.
ReorderResult reorder(const Matrix& normalized, const ClusterAssignment& assignment,
                      const StorylineTree& tree);

/// The assignment implied by a reorder: new labels, new centers, new distance.
ClusterAssignment reordered_assignment(const ClusterAssignment& original, const ReorderResult& result);

struct SplitCounts {
  std::vector<std::pair<std::string, std::size_t>> per_feature;  ///< feature order
  std::size_t total = 0;
  std::size_t distinct = 0;
  bool repeated = false;  ///< some feature is split on more than once
};

SplitCounts split_counts(const StorylineTree& tree);

/// Features the tree branches on, by index, ascending.
std::vector<std::size_t> features_used(const StorylineTree& tree);

/// Clustering, tree, and reorder for one k.
struct StorylineResult {
  ClusterAssignment assignment;
  StorylineTree tree;
  ReorderResult reorder;
  double training_accuracy = 0.0;
};

/// Fits a `max_leaves`-leaf tree (k when 0) to `assignment` and reorders.
StorylineResult build_storylines(const FeatureSpace& space, const ClusterAssignment& assignment,
                                 const TreeOptions& options = {}, std::size_t max_leaves = 0);

struct KAdvice {
  std::size_t k = 0;
  double d_initial = 0.0;
  std::optional<double> d_reordered;  ///< absent when a cluster vanished in reorder
  bool repeated_split = false;
  std::size_t distinct_features = 0;
  double training_accuracy = 0.0;
  SplitCounts splits;
};

/// Elbow values plus split diagnostics for every k. Advisory only.
std::vector<KAdvice> advise_k(const FeatureSpace& space, const ElbowOptions& options,
                              const TreeOptions& tree_options = {});

}  // namespace storyline
