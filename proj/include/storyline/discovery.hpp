#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "storyline/scenario.hpp"
#include "storyline/tree.hpp"

namespace storyline {

/// Stratified assignment of scenarios to cross-validation folds.
struct FoldPlan {
  std::size_t n_folds = 5;
  std::vector<std::size_t> fold_of;  ///< one fold id per scenario
  std::uint64_t seed = 0;

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

/// Shuffles each label's scenarios (seeded) and deals them round-robin, so
/// every fold holds floor or ceil of its proportional share of each label.
FoldPlan make_fold_plan(std::span<const int> labels, std::size_t n_folds = 5, std::uint64_t seed = 0);

/// Classification tree predicting cluster labels from uncertain inputs.
StorylineTree discovery_tree(const FeatureSpace& theta, std::span<const int> labels, std::size_t max_leaves,
                             const TreeOptions& options = {});
StorylineTree discovery_tree(const UncertaintyMatrix& theta, std::span<const int> labels,
                             std::size_t max_leaves, const TreeOptions& options = {});

/// Fraction of rows whose label the tree predicts correctly.
double coverage(const StorylineTree& tree, const Matrix& routing, std::span<const int> labels);

/// Out-of-fold coverage pooled over all folds: total correct / N.
double cv_coverage(const FeatureSpace& theta, std::span<const int> labels, std::size_t max_leaves,
                   const FoldPlan& plan, const TreeOptions& options = {});

struct DiscoveryEntry {
  std::size_t max_leaves = 0;
  std::size_t leaves = 0;
  double interpretability = 0.0;  ///< 1 / |features_used|
  double coverage = 0.0;
  double cv_coverage = 0.0;
  std::vector<std::size_t> feature_indices;
  std::vector<std::string> features_used;
};

struct DiscoveryCurve {
  std::vector<DiscoveryEntry> entries;
};

/// One entry per leaf budget. Feature usage comes from the full-data tree.
DiscoveryCurve discovery_sweep(const FeatureSpace& theta, std::span<const int> labels,
                               std::span<const std::size_t> leaf_budgets, const FoldPlan& plan,
                               const TreeOptions& options = {});

struct DiscoverySelection {
  std::size_t index = 0;
  DiscoveryEntry entry;
  std::string reason;
};

using SelectionPolicy = std::function<DiscoverySelection(const DiscoveryCurve&)>;

/// Among entries whose cv_coverage is within `margin` of the best, take the
/// most interpretable; ties go to the smallest leaf budget.
SelectionPolicy margin_policy(double margin = 0.02);

DiscoverySelection select_discovery_tree(const DiscoveryCurve& curve, double margin = 0.02);
DiscoverySelection select_discovery_tree(const DiscoveryCurve& curve, const SelectionPolicy& policy);

}  // namespace storyline
