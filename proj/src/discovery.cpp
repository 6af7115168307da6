#include "storyline/discovery.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <set>

#include "storyline/error.hpp"
#include "storyline/random.hpp"

namespace storyline {

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_fold_plan(std::span<const int> labels, std::size_t n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw UsageError("need at least 2 folds");
  if (labels.size() < n_folds) {
    throw UsageError(std::to_string(n_folds) + " folds requested for " + std::to_string(labels.size()) +
                     " scenarios");
  }
  int top = -1;
  for (int l : labels) {
    if (l < 0) throw DataError("negative cluster label");
    top = std::max(top, l);
  }

  FoldPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), 0);
  std::size_t position = 0;
  for (int label = 0; label <= top; ++label) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) rows.push_back(i);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::swap(rows[i - 1], rows[static_cast<std::size_t>(rng.below(i))]);
    }
    for (std::size_t r : rows) plan.fold_of[r] = position++ % n_folds;
  }
  return plan;
}

StorylineTree discovery_tree(const FeatureSpace& theta, std::span<const int> labels, std::size_t max_leaves,
                             const TreeOptions& options) {
  if (max_leaves < 2) throw UsageError("a discovery tree needs max_leaves >= 2");
  return fit_tree(theta, labels, max_leaves, options);
}

StorylineTree discovery_tree(const UncertaintyMatrix& theta, std::span<const int> labels,
                             std::size_t max_leaves, const TreeOptions& options) {
  return discovery_tree(make_feature_space(theta), labels, max_leaves, options);
}

double coverage(const StorylineTree& tree, const Matrix& routing, std::span<const int> labels) {
  if (labels.size() != routing.rows()) throw DataError("label count does not match row count");
  std::size_t correct = 0;
  for (std::size_t r = 0; r < routing.rows(); ++r) correct += predict(tree, routing.row(r)) == labels[r];
  return static_cast<double>(correct) / static_cast<double>(routing.rows());
}

namespace {

void check_plan(const FoldPlan& plan, std::span<const int> labels) {
  if (plan.fold_of.size() != labels.size()) throw DataError("fold plan does not match the number of scenarios");
  const std::set<int> all(labels.begin(), labels.end());
  for (std::size_t f = 0; f < plan.n_folds; ++f) {
    std::set<int> seen;
    std::size_t held_out = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (plan.fold_of[i] != f) {
        seen.insert(labels[i]);
      } else {
        ++held_out;
      }
    }
    if (held_out == 0) throw DataError("fold " + std::to_string(f) + " is empty");
    if (seen != all) {
      throw DataError("training data outside fold " + std::to_string(f) +
                      " lacks a cluster label; stratified folds need every cluster to have at least 2 members");
    }
  }
}

std::size_t fold_correct(const FeatureSpace& theta, std::span<const int> labels, std::size_t max_leaves,
                         const FoldPlan& plan, std::size_t fold, const TreeOptions& options) {
  const auto train = plan.complement(fold);
  const StorylineTree tree = fit_tree(theta, labels, max_leaves, options, train);
  std::size_t correct = 0;
  for (std::size_t r : plan.members(fold)) correct += predict(tree, theta.routing.row(r)) == labels[r];
  return correct;
}

}  // namespace

double cv_coverage(const FeatureSpace& theta, std::span<const int> labels, std::size_t max_leaves,
                   const FoldPlan& plan, const TreeOptions& options) {
  check_plan(plan, labels);
  std::size_t correct = 0;
  for (std::size_t f = 0; f < plan.n_folds; ++f) correct += fold_correct(theta, labels, max_leaves, plan, f, options);
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

DiscoveryCurve discovery_sweep(const FeatureSpace& theta, std::span<const int> labels,
                               std::span<const std::size_t> leaf_budgets, const FoldPlan& plan,
                               const TreeOptions& options) {
  if (leaf_budgets.empty()) throw UsageError("no leaf budgets given");
  for (std::size_t b : leaf_budgets) {
    if (b < 2) throw UsageError("leaf budgets must be >= 2");
  }
  check_plan(plan, labels);

  // Work item (budget b, slot s): s < n_folds is a fold, s == n_folds the full-data tree.
  const std::size_t slots = plan.n_folds + 1;
  const std::size_t items = leaf_budgets.size() * slots;
  std::vector<std::size_t> correct(items, 0);
  std::vector<StorylineTree> full(leaf_budgets.size());
  std::vector<std::exception_ptr> failures(items);
  const auto total = static_cast<std::ptrdiff_t>(items);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < total; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::size_t b = i / slots;
    const std::size_t s = i % slots;
    try {
      if (s == plan.n_folds) {
        full[b] = discovery_tree(theta, labels, leaf_budgets[b], options);
      } else {
        correct[i] = fold_correct(theta, labels, leaf_budgets[b], plan, s, options);
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  DiscoveryCurve curve;
  for (std::size_t b = 0; b < leaf_budgets.size(); ++b) {
    DiscoveryEntry e;
    e.max_leaves = leaf_budgets[b];
    e.leaves = full[b].leaf_count();
    e.feature_indices = features_used(full[b]);
    if (e.feature_indices.empty()) {
      throw DataError("discovery tree with budget " + std::to_string(e.max_leaves) +
                      " found no split that separates the clusters");
    }
    for (std::size_t f : e.feature_indices) e.features_used.push_back(theta.descriptors[f].name);
    e.interpretability = 1.0 / static_cast<double>(e.feature_indices.size());
    e.coverage = coverage(full[b], theta.routing, labels);
    std::size_t pooled = 0;
    for (std::size_t s = 0; s < plan.n_folds; ++s) pooled += correct[b * slots + s];
    e.cv_coverage = static_cast<double>(pooled) / static_cast<double>(labels.size());
    curve.entries.push_back(std::move(e));
  }
  return curve;
}

SelectionPolicy margin_policy(double margin) {
  return [margin](const DiscoveryCurve& curve) {
    if (curve.entries.empty()) throw DataError("cannot select from an empty discovery curve");
    double best_cv = 0.0;
    for (const auto& e : curve.entries) best_cv = std::max(best_cv, e.cv_coverage);
    std::size_t pick = curve.entries.size();
    for (std::size_t i = 0; i < curve.entries.size(); ++i) {
      const auto& e = curve.entries[i];
      if (e.cv_coverage < best_cv - margin) continue;
      if (pick == curve.entries.size()) {
        pick = i;
        continue;
      }
      const auto& p = curve.entries[pick];
      if (e.interpretability > p.interpretability ||
          (e.interpretability == p.interpretability && e.max_leaves < p.max_leaves)) {
        pick = i;
      }
    }
    DiscoverySelection sel;
    sel.index = pick;
    sel.entry = curve.entries[pick];
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "max_leaves=%zu: interpretability %.4g, cv_coverage %.4g within %.4g of the best %.4g",
                  sel.entry.max_leaves, sel.entry.interpretability, sel.entry.cv_coverage, margin, best_cv);
    sel.reason = buf;
    return sel;
  };
}

DiscoverySelection select_discovery_tree(const DiscoveryCurve& curve, double margin) {
  return margin_policy(margin)(curve);
}

DiscoverySelection select_discovery_tree(const DiscoveryCurve& curve, const SelectionPolicy& policy) {
  if (curve.entries.empty()) throw DataError("cannot select from an empty discovery curve");
  return policy(curve);
}

}  // namespace storyline
