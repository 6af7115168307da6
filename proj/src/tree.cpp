#include "storyline/tree.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

namespace storyline {

namespace {

std::size_t label_space(std::span<const int> labels) {
  int top = -1;
  for (int l : labels) {
    if (l < 0) throw DataError("negative cluster label " + std::to_string(l));
    top = std::max(top, l);
  }
  return static_cast<std::size_t>(top + 1);
}

int majority_label(std::span<const int> labels, std::span<const std::size_t> members, std::size_t n_labels) {
  std::vector<std::size_t> counts(n_labels, 0);
  for (std::size_t r : members) ++counts[static_cast<std::size_t>(labels[r])];
  // max_element returns the first maximum, i.e. the lowest label on ties.
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

bool single_label(std::span<const int> labels, std::span<const std::size_t> members) {
  for (std::size_t r : members) {
    if (labels[r] != labels[members.front()]) return false;
  }
  return true;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

std::vector<std::string> FeatureSpace::names() const {
  std::vector<std::string> out;
  for (const auto& d : descriptors) out.push_back(d.name);
  return out;
}

FeatureSpace make_feature_space(const ScenarioMatrix& scenarios) {
  FeatureSpace space;
  Normalization norm = fit_normalization(scenarios);
  space.routing = apply_normalization(scenarios.values(), norm).values;
  space.report = scenarios.values();
  space.descriptors = scenarios.descriptors();
  space.initial_ranges = norm.ranges();
  space.normalization = std::move(norm);
  return space;
}

FeatureSpace make_feature_space(const UncertaintyMatrix& theta) {
  FeatureSpace space;
  space.routing = theta.values();
  space.report = theta.values();
  space.descriptors = theta.descriptors();
  space.initial_ranges = column_ranges(theta.values());
  return space;
}

FeatureSpace make_feature_space(const Matrix& values) {
  FeatureSpace space;
  space.routing = values;
  space.report = values;
  for (std::size_t c = 0; c < values.cols(); ++c) space.descriptors.push_back({"f" + std::to_string(c)});
  space.initial_ranges = column_ranges(values);
  return space;
}

std::size_t StorylineTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t StorylineTree::leaf_for(std::span<const double> routing_values) const {
  if (routing_values.size() != features.size()) {
    throw DataError("expected " + std::to_string(features.size()) + " values, got " +
                    std::to_string(routing_values.size()));
  }
  std::size_t id = root;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    id = routing_values[node.feature] <= node.threshold ? node.left : node.right;
  }
  return id;
}

std::vector<std::string> StorylineTree::feature_names() const {
  std::vector<std::string> out;
  for (const auto& d : features) out.push_back(d.name);
  return out;
}

std::optional<SplitCandidate> best_split(const Matrix& features, std::span<const int> labels,
                                         std::span<const std::size_t> members, Impurity impurity) {
  if (labels.size() != features.rows()) throw DataError("label count does not match row count");
  std::vector<std::size_t> everyone;
  if (members.empty()) {
    everyone = all_rows(features.rows());
    members = everyone;
  }
  if (members.size() < 2 || single_label(labels, members)) return std::nullopt;
  return kernels::best_split(features, labels, label_space(labels), members, impurity);
}

StorylineTree fit_tree(const FeatureSpace& space, std::span<const int> labels, std::size_t max_leaves,
                       const TreeOptions& options, std::span<const std::size_t> rows) {
  if (max_leaves < 1) throw UsageError("max_leaves must be at least 1");
  if (labels.size() != space.rows()) throw DataError("label count does not match row count");
  options.locks.validate();
  const std::size_t n_labels = label_space(labels);

  std::vector<std::size_t> root_rows = rows.empty() ? all_rows(space.rows())
                                                    : std::vector<std::size_t>(rows.begin(), rows.end());
  if (root_rows.empty()) throw DataError("cannot fit a tree on zero rows");

  StorylineTree tree;
  tree.max_leaves = max_leaves;
  tree.features = space.descriptors;

  struct Pending {
    std::vector<std::size_t> members;
    std::optional<SplitCandidate> split;
    double priority = 0.0;
  };
  std::vector<Pending> pending;  // indexed by node id

  const auto make_node = [&](std::vector<std::size_t> members) {
    TreeNode node;
    node.id = tree.nodes.size();
    node.member_count = members.size();
    node.label = majority_label(labels, members, n_labels);
    node.summary = node_summary(space.report, members, space.initial_ranges, options.locks);
    Pending p;
    if (members.size() >= 2 && !single_label(labels, members)) {
      p.split = kernels::best_split(space.routing, labels, n_labels, members, options.impurity);
      if (p.split) p.priority = static_cast<double>(members.size()) * p.split->decrease;
    }
    p.members = std::move(members);
    tree.nodes.push_back(std::move(node));
    pending.push_back(std::move(p));
  };

  make_node(std::move(root_rows));
  std::size_t leaves = 1;
  while (leaves < max_leaves) {
    std::optional<std::size_t> pick;
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      if (!tree.nodes[id].is_leaf() || !pending[id].split) continue;
      if (!pick || pending[id].priority > pending[*pick].priority) pick = id;
    }
    if (!pick) break;

    const std::size_t id = *pick;
    const SplitCandidate split = *pending[id].split;
    std::vector<std::size_t> left, right;
    for (std::size_t r : pending[id].members) {
      (space.routing(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    if (left.size() != split.left_count || right.empty()) {
      throw InvariantError("split does not reproduce its own partition");
    }
    pending[id].split.reset();
    pending[id].members.clear();

    const std::size_t left_id = tree.nodes.size();
    make_node(std::move(left));
    make_node(std::move(right));

    TreeNode& node = tree.nodes[id];
    node.kind = NodeKind::Internal;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.threshold_raw = space.normalization ? space.normalization->denormalize(split.feature, split.threshold)
                                             : split.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    ++leaves;
  }
  return tree;
}

StorylineTree fit_tree(const Matrix& features, std::span<const int> labels, std::size_t max_leaves,
                       const TreeOptions& options) {
  return fit_tree(make_feature_space(features), labels, max_leaves, options);
}

int predict(const StorylineTree& tree, std::span<const double> routing_values) {
  return tree.nodes[tree.leaf_for(routing_values)].label;
}

std::vector<int> predict_all(const StorylineTree& tree, const Matrix& routing) {
  std::vector<int> out(routing.rows());
  for (std::size_t r = 0; r < routing.rows(); ++r) out[r] = predict(tree, routing.row(r));
  return out;
}

ReorderResult reorder(const Matrix& normalized, const ClusterAssignment& assignment,
                      const StorylineTree& tree) {
  if (assignment.labels.size() != normalized.rows()) {
    throw DataError("assignment does not match the number of scenarios");
  }
  ReorderResult out;
  out.labels_before = assignment.labels;
  out.labels_after = predict_all(tree, normalized);
  out.d_before = assignment.distance;

  std::vector<std::size_t> counts(assignment.k, 0);
  for (int l : out.labels_after) {
    if (l < 0 || static_cast<std::size_t>(l) >= assignment.k) {
      throw InvariantError("tree predicted label " + std::to_string(l) + " outside [0, k)");
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < assignment.k; ++c) {
    if (counts[c] == 0) {
      throw VanishedClusterError("cluster " + std::to_string(c) + " has no members after reordering; no tree leaf predicts it");
    }
  }
  for (std::size_t i = 0; i < out.labels_after.size(); ++i) {
    if (out.labels_after[i] != out.labels_before[i]) ++out.moved_count;
  }
  out.centers_after = cluster_means(normalized, out.labels_after, assignment.k);
  out.d_after = distance_measure(normalized, out.labels_after, out.centers_after);
  return out;
}

ClusterAssignment reordered_assignment(const ClusterAssignment& original, const ReorderResult& result) {
  ClusterAssignment out = original;
  out.labels = result.labels_after;
  out.centers = result.centers_after;
  out.distance = result.d_after;
  return out;
}

SplitCounts split_counts(const StorylineTree& tree) {
  SplitCounts out;
  std::vector<std::size_t> counts(tree.features.size(), 0);
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) ++counts[node.feature];
  }
  for (std::size_t f = 0; f < counts.size(); ++f) {
    out.per_feature.emplace_back(tree.features[f].name, counts[f]);
    out.total += counts[f];
    if (counts[f] > 0) ++out.distinct;
    if (counts[f] > 1) out.repeated = true;
  }
  return out;
}

std::vector<std::size_t> features_used(const StorylineTree& tree) {
  std::vector<std::size_t> out;
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) out.push_back(node.feature);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StorylineResult build_storylines(const FeatureSpace& space, const ClusterAssignment& assignment,
                                 const TreeOptions& options, std::size_t max_leaves) {
  StorylineResult out;
  out.assignment = assignment;
  out.tree = fit_tree(space, assignment.labels, max_leaves == 0 ? assignment.k : max_leaves, options);
  out.reorder = reorder(space.routing, assignment, out.tree);
  out.training_accuracy =
      1.0 - static_cast<double>(out.reorder.moved_count) / static_cast<double>(space.rows());
  return out;
}

std::vector<KAdvice> advise_k(const FeatureSpace& space, const ElbowOptions& options,
                              const TreeOptions& tree_options) {
  const ElbowRun run = elbow_curve(space.routing, options);
  std::vector<KAdvice> out(run.points.size());
  std::vector<std::exception_ptr> failures(out.size());
  const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      KAdvice& a = out[i];
      a.k = run.points[i].k;
      a.d_initial = run.points[i].d_initial;
      const ClusterAssignment& assignment = run.assignments[i];
      StorylineTree tree = fit_tree(space, assignment.labels, assignment.k, tree_options);
      a.splits = split_counts(tree);
      a.repeated_split = a.splits.repeated;
      a.distinct_features = a.splits.distinct;
      const auto predicted = predict_all(tree, space.routing);
      std::size_t correct = 0;
      for (std::size_t r = 0; r < predicted.size(); ++r) correct += predicted[r] == assignment.labels[r];
      a.training_accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
      try {
        a.d_reordered = reorder(space.routing, assignment, tree).d_after;
      } catch (const VanishedClusterError&) {
        a.d_reordered.reset();
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

}  // namespace storyline
