#include "storyline/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "storyline/clustering.hpp"
#include "storyline/discovery.hpp"
#include "storyline/error.hpp"
#include "storyline/io.hpp"
#include "storyline/render.hpp"
#include "storyline/screening.hpp"
#include "storyline/synth.hpp"
#include "storyline/tree.hpp"

namespace storyline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Calls fn(key, member) for every serializable field, in echo order.
template <class Config, class Fn>
void visit_fields(Config& c, Fn&& fn) {
  fn("command", c.command);
  fn("input", c.input);
  fn("theta", c.theta);
  fn("meta", c.meta);
  fn("labels", c.labels);
  fn("tree", c.tree);
  fn("seed", c.seed);
  fn("k", c.k);
  fn("k_min", c.k_min);
  fn("k_max", c.k_max);
  fn("restarts", c.restarts);
  fn("max_iter", c.max_iter);
  fn("tol", c.tol);
  fn("max_leaves", c.max_leaves);
  fn("impurity", c.impurity);
  fn("lock_partial", c.lock_partial);
  fn("lock_locked", c.lock_locked);
  fn("folds", c.folds);
  fn("leaf_budgets", c.leaf_budgets);
  fn("select_margin", c.select_margin);
  fn("rule", c.rule);
  fn("statistic", c.statistic);
  fn("blobs", c.blobs);
  fn("n", c.n);
  fn("m", c.m);
  fn("p", c.p);
  fn("noise", c.noise);
  fn("separation", c.separation);
  fn("driver_a", c.driver_a);
  fn("driver_b", c.driver_b);
  fn("jobs", c.jobs);
}

std::string real(double v) { return format_significant(v, 10); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class OutputDir {
 public:
  explicit OutputDir(const RunConfig& config) : root_(config.out) {
    if (config.out.empty()) throw UsageError("--out must not be empty");
  }
  void write(const std::string& name, const std::string& content) const { write_file_atomic(root_ / name, content); }
  fs::path path(const std::string& name) const { return root_ / name; }

 private:
  fs::path root_;
};

void echo_config(const RunConfig& config, const OutputDir& dir) {
  ordered_json doc = to_json(config);
  doc.erase("out");
  dir.write("config.json", doc.dump(2) + "\n");
}

TreeOptions tree_options(const RunConfig& c) {
  TreeOptions o;
  if (c.impurity == "gini") {
    o.impurity = Impurity::Gini;
  } else if (c.impurity == "entropy") {
    o.impurity = Impurity::Entropy;
  } else {
    throw UsageError("--impurity must be gini or entropy");
  }
  o.locks = {c.lock_partial, c.lock_locked};
  o.locks.validate();
  return o;
}

std::optional<fs::path> optional_path(const std::string& s) {
  return s.empty() ? std::nullopt : std::optional<fs::path>(s);
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::size_t require_k(const RunConfig& c) {
  if (!c.k) throw UsageError("--k is required");
  return *c.k;
}

KMeansOptions kmeans_options(const RunConfig& c, std::size_t k) {
  KMeansOptions o;
  o.k = k;
  o.seed = c.seed + SeedPlan::kClustering;
  o.restarts = c.restarts;
  o.max_iter = c.max_iter;
  o.tol = c.tol;
  return o;
}

ElbowOptions elbow_options(const RunConfig& c) {
  if (c.k_min < 1 || c.k_max < c.k_min) throw UsageError("need 1 <= --k-min <= --k-max");
  ElbowOptions o;
  for (std::size_t k = c.k_min; k <= c.k_max; ++k) o.k_values.push_back(k);
  o.seed = c.seed + SeedPlan::kClustering;
  o.restarts = c.restarts;
  o.max_iter = c.max_iter;
  o.tol = c.tol;
  return o;
}

void write_radars(const OutputDir& dir, const StorylineTree& tree) {
  const auto& initial = tree.nodes.at(tree.root).summary.ranges;
  for (const auto& node : tree.nodes) {
    RadarStyle style;
    style.label = node.is_leaf() ? node.label : -1;
    style.title = node.is_leaf() ? "Storyline " + std::to_string(node.label) + " (node " + std::to_string(node.id) + ")"
                                 : "Node " + std::to_string(node.id);
    dir.write("radar/node_" + std::to_string(node.id) + ".svg",
              render_radar_svg(node.summary, tree.features, initial, style));
  }
}

void write_tree(const OutputDir& dir, const std::string& stem, const StorylineTree& tree, const TreeMeta& meta) {
  dir.write(stem + ".json", export_tree_json(tree, meta));
  dir.write(stem + ".txt", render_tree_text(tree));
  dir.write(stem + ".dot", export_tree_dot(tree));
}

struct PipelineRun {
  ScenarioMatrix scenarios;
  StorylineResult result;
};

PipelineRun run_storyline_pipeline(const RunConfig& c) {
  require(c.input, "--input");
  const std::size_t k = require_k(c);
  ScenarioMatrix scenarios = read_scenario_matrix(c.input, optional_path(c.meta));
  const FeatureSpace space = make_feature_space(scenarios);
  const ClusterAssignment assignment = kmeans(space.routing, kmeans_options(c, k));
  StorylineResult result = build_storylines(space, assignment, tree_options(c), c.max_leaves);
  return {std::move(scenarios), std::move(result)};
}

int cmd_pipeline(const RunConfig& c, std::ostream& out) {
  const OutputDir dir(c);
  const PipelineRun run = run_storyline_pipeline(c);
  const auto& r = run.result;

  std::string assignment = "id,cluster_initial,cluster_reordered\n";
  for (std::size_t i = 0; i < run.scenarios.scenarios(); ++i) {
    assignment += csv_escape(run.scenarios.scenario_ids()[i]) + "," + std::to_string(r.reorder.labels_before[i]) +
                  "," + std::to_string(r.reorder.labels_after[i]) + "\n";
  }
  dir.write("assignment.csv", assignment);

  std::string centers = "stage,cluster";
  for (const auto& d : run.scenarios.descriptors()) centers += "," + csv_escape(d.name);
  centers += "\n";
  const auto dump_centers = [&](const char* stage, const Matrix& m) {
    for (std::size_t c2 = 0; c2 < m.rows(); ++c2) {
      centers += std::string(stage) + "," + std::to_string(c2);
      for (std::size_t j = 0; j < m.cols(); ++j) centers += "," + real(m(c2, j));
      centers += "\n";
    }
  };
  dump_centers("initial", r.assignment.centers);
  dump_centers("reordered", r.reorder.centers_after);
  dir.write("centers.csv", centers);

  TreeMeta meta{r.assignment.k, r.reorder.d_before, r.reorder.d_after, c.seed};
  write_tree(dir, "tree", r.tree, meta);
  write_radars(dir, r.tree);

  const double increase = (r.reorder.d_after - r.reorder.d_before) / r.reorder.d_before;
  ordered_json report;
  report["k"] = r.assignment.k;
  report["scenarios"] = run.scenarios.scenarios();
  report["d_before"] = round_significant(r.reorder.d_before);
  report["d_after"] = round_significant(r.reorder.d_after);
  report["relative_increase"] = r.reorder.d_before > 0.0 ? ordered_json(round_significant(increase)) : ordered_json(nullptr);
  report["moved_count"] = r.reorder.moved_count;
  report["training_accuracy"] = round_significant(r.training_accuracy);
  report["leaves"] = r.tree.leaf_count();
  report["restarts_used"] = r.assignment.restarts_used;
  dir.write("reorder.json", report.dump(2) + "\n");
  echo_config(c, dir);

  out << render_tree_text(r.tree);
  out << "d_before=" << real(r.reorder.d_before) << " d_after=" << real(r.reorder.d_after)
      << " moved=" << r.reorder.moved_count << " accuracy=" << real(r.training_accuracy) << "\n";
  return 0;
}

int cmd_elbow(const RunConfig& c, std::ostream& out) {
  require(c.input, "--input");
  const OutputDir dir(c);
  const ScenarioMatrix scenarios = read_scenario_matrix(c.input, optional_path(c.meta));
  const FeatureSpace space = make_feature_space(scenarios);
  const TreeOptions topts = tree_options(c);
  const ReorderHook hook = [&](const ClusterAssignment& a) -> std::optional<double> {
    try {
      return build_storylines(space, a, topts).reorder.d_after;
    } catch (const VanishedClusterError&) {
      return std::nullopt;
    }
  };
  const ElbowRun run = elbow_curve(space.routing, elbow_options(c), hook);

  std::string csv = "k,d_initial,d_reordered\n";
  for (const auto& p : run.points) {
    csv += std::to_string(p.k) + "," + real(p.d_initial) + "," + (p.d_reordered ? real(*p.d_reordered) : "") + "\n";
  }
  dir.write("elbow.csv", csv);
  dir.write("elbow.svg", render_elbow_svg(run.points));
  echo_config(c, dir);
  out << csv;
  return 0;
}

int cmd_advise(const RunConfig& c, std::ostream& out) {
  require(c.input, "--input");
  const OutputDir dir(c);
  const ScenarioMatrix scenarios = read_scenario_matrix(c.input, optional_path(c.meta));
  const FeatureSpace space = make_feature_space(scenarios);
  const auto rows = advise_k(space, elbow_options(c), tree_options(c));

  std::string csv = "k,d_initial,d_reordered,repeated_split,distinct_features,training_accuracy";
  for (const auto& d : scenarios.descriptors()) csv += ",splits_" + csv_escape(d.name);
  csv += "\n";
  for (const auto& a : rows) {
    csv += std::to_string(a.k) + "," + real(a.d_initial) + "," + (a.d_reordered ? real(*a.d_reordered) : "") + "," +
           (a.repeated_split ? "true" : "false") + "," + std::to_string(a.distinct_features) + "," +
           real(a.training_accuracy);
    for (const auto& [name, count] : a.splits.per_feature) csv += "," + std::to_string(count);
    csv += "\n";
  }
  dir.write("advise.csv", csv);
  echo_config(c, dir);
  out << csv;
  return 0;
}

std::vector<int> read_labels(const std::string& path, const std::vector<std::string>& expected_ids) {
  const RawTable table = read_csv_table(path);
  std::size_t col = table.names.size();
  for (const char* want : {"cluster_reordered", "label", "cluster"}) {
    for (std::size_t i = 0; i < table.names.size() && col == table.names.size(); ++i) {
      if (table.names[i] == want) col = i;
    }
  }
  if (col == table.names.size()) {
    if (table.names.size() != 1) throw DataError(path + ": no cluster_reordered, label or cluster column");
    col = 0;
  }
  if (!table.row_ids.empty() && table.row_ids != expected_ids) {
    throw DataError(path + ": scenario ids do not match the uncertainty matrix");
  }
  if (table.columns[col].size() != expected_ids.size()) {
    throw DataError(path + ": has " + std::to_string(table.columns[col].size()) + " labels for " +
                    std::to_string(expected_ids.size()) + " scenarios");
  }
  std::vector<int> labels;
  for (double v : table.columns[col]) {
    if (v < 0.0 || v != static_cast<double>(static_cast<int>(v))) throw DataError(path + ": labels must be non-negative integers");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

int cmd_discover(const RunConfig& c, std::ostream& out) {
  require(c.theta, "--theta");
  const OutputDir dir(c);
  const UncertaintyMatrix theta = read_uncertainty_matrix(c.theta, optional_path(c.meta));
  std::vector<int> labels;
  if (!c.labels.empty()) {
    labels = read_labels(c.labels, theta.scenario_ids());
  } else {
    const PipelineRun run = run_storyline_pipeline(c);
    theta.check_aligned(run.scenarios);
    labels = run.result.reorder.labels_after;
  }

  const FeatureSpace space = make_feature_space(theta);
  const auto budgets = parse_size_list(c.leaf_budgets);
  const FoldPlan plan = make_fold_plan(labels, c.folds, c.seed + SeedPlan::kFolds);
  const TreeOptions topts = tree_options(c);
  const DiscoveryCurve curve = discovery_sweep(space, labels, budgets, plan, topts);
  const DiscoverySelection sel = select_discovery_tree(curve, c.select_margin);

  std::string csv = "max_leaves,leaves,interpretability,coverage,cv_coverage,features_used\n";
  for (const auto& e : curve.entries) {
    std::string used;
    for (const auto& f : e.features_used) used += (used.empty() ? "" : ";") + f;
    csv += std::to_string(e.max_leaves) + "," + std::to_string(e.leaves) + "," + real(e.interpretability) + "," +
           real(e.coverage) + "," + real(e.cv_coverage) + "," + csv_escape(used) + "\n";
  }
  dir.write("discovery.csv", csv);
  dir.write("discovery.svg", render_discovery_svg(curve));

  const StorylineTree chosen = discovery_tree(space, labels, sel.entry.max_leaves, topts);
  std::size_t k = 0;
  for (int l : labels) k = std::max(k, static_cast<std::size_t>(l) + 1);
  write_tree(dir, "discovery_tree", chosen, TreeMeta{k, std::nullopt, std::nullopt, c.seed});

  ordered_json selection;
  selection["max_leaves"] = sel.entry.max_leaves;
  selection["leaves"] = sel.entry.leaves;
  selection["interpretability"] = round_significant(sel.entry.interpretability);
  selection["coverage"] = round_significant(sel.entry.coverage);
  selection["cv_coverage"] = round_significant(sel.entry.cv_coverage);
  selection["features_used"] = sel.entry.features_used;
  selection["select_margin"] = c.select_margin;
  selection["reason"] = sel.reason;
  dir.write("selection.json", selection.dump(2) + "\n");

  if (sel.entry.feature_indices.size() == 2) {
    const auto fx = sel.entry.feature_indices[0], fy = sel.entry.feature_indices[1];
    const auto x = theta.values().column(fx), y = theta.values().column(fy);
    dir.write("scatter.svg", render_scatter_svg(x, y, labels, theta.descriptors()[fx].name, theta.descriptors()[fy].name));
  }
  echo_config(c, dir);
  out << csv << "selected: " << sel.reason << "\n";
  return 0;
}

int cmd_screen(const RunConfig& c, std::ostream& out) {
  require(c.input, "--input");
  require(c.rule, "--rule");
  const OutputDir dir(c);
  const ScreeningRule rule = parse_screening_rule(c.rule);
  ScreeningStatistic stat;
  if (c.statistic == "range") {
    stat = ScreeningStatistic::Range;
  } else if (c.statistic == "variance") {
    stat = ScreeningStatistic::Variance;
  } else {
    throw UsageError("--statistic must be range or variance");
  }
  const ScenarioMatrix flows = read_scenario_matrix(c.input, optional_path(c.meta));
  const ScreeningReport report = screen(flows, rule, stat);

  std::string csv = "rank,name,unit,min,max,range,variance,selected\n";
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    const auto& r = report.ranking[i];
    csv += std::to_string(i + 1) + "," + csv_escape(r.name) + "," + csv_escape(r.unit) + "," + real(r.min) + "," +
           real(r.max) + "," + real(r.range) + "," + real(r.variance) + "," + (r.selected ? "true" : "false") + "\n";
  }
  dir.write("screening.csv", csv);

  std::string q = "name,min,q1,median,q3,max\n";
  const auto five = quartiles(flows);
  for (std::size_t j = 0; j < five.size(); ++j) {
    q += csv_escape(flows.descriptors()[j].name) + "," + real(five[j].min) + "," + real(five[j].q1) + "," +
         real(five[j].median) + "," + real(five[j].q3) + "," + real(five[j].max) + "\n";
  }
  dir.write("quartiles.csv", q);
  dir.write("screening.svg", render_screening_svg(report));
  echo_config(c, dir);
  out << csv;
  return 0;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const OutputDir dir(c);
  SynthSpec spec;
  spec.blobs = c.blobs;
  spec.scenarios = c.n;
  spec.outputs = c.m;
  spec.inputs = c.p;
  spec.noise = c.noise;
  spec.separation = c.separation;
  spec.seed = c.seed + SeedPlan::kSynth;
  spec.driver_a = c.driver_a;
  spec.driver_b = c.driver_b;
  const SynthData data = synthesize(spec);

  dir.write("scenarios.csv", to_csv(data.scenarios));
  dir.write("theta.csv", to_csv(data.theta));
  std::string labels = "id,label,clean_label\n";
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    labels += data.scenarios.row_ids[i] + "," + std::to_string(data.labels[i]) + "," +
              std::to_string(data.clean_labels[i]) + "\n";
  }
  dir.write("labels.csv", labels);

  ordered_json meta;
  meta["columns"] = ordered_json::array();
  for (const auto& name : data.scenarios.names) meta["columns"].push_back({{"name", name}, {"unit", "PJ"}, {"kind", "ooi"}, {"categorical", false}});
  for (const auto& name : data.theta.names) meta["columns"].push_back({{"name", name}, {"unit", "unitless"}, {"kind", "theta"}, {"categorical", false}});
  dir.write("meta.json", meta.dump(2) + "\n");
  echo_config(c, dir);
  out << "wrote " << spec.scenarios << " scenarios (" << spec.blobs << " blobs, " << spec.outputs << " outputs, "
      << spec.inputs << " uncertain inputs) to " << c.out << "\n";
  return 0;
}

int cmd_render(const RunConfig& c, std::ostream& out) {
  require(c.tree, "--tree");
  const OutputDir dir(c);
  const ParsedTree parsed = parse_tree_json(read_file(c.tree));
  dir.write("tree.txt", render_tree_text(parsed.tree));
  dir.write("tree.dot", export_tree_dot(parsed.tree));
  write_radars(dir, parsed.tree);
  echo_config(c, dir);
  out << render_tree_text(parsed.tree);
  return 0;
}

struct Bindings {
  std::vector<std::function<void(RunConfig&)>> apply;
};

template <class T, class Setter>
void bind(CLI::App* app, Bindings& b, const std::string& flag, const std::string& help, Setter setter) {
  auto holder = std::make_shared<T>();
  CLI::Option* opt = app->add_option(flag, *holder, help);
  b.apply.push_back([opt, holder, setter](RunConfig& c) {
    if (opt->count() > 0) setter(c, *holder);
  });
}

template <class T>
void bind_member(CLI::App* app, Bindings& b, const std::string& flag, T RunConfig::*member, const std::string& help) {
  bind<T>(app, b, flag, help, [member](RunConfig& c, const T& v) { c.*member = v; });
}

void add_shared_flags(CLI::App* app, Bindings& b, std::string& config_path) {
  app->add_option("--config", config_path, "JSON run configuration; flags override its values");
  bind_member(app, b, "--input", &RunConfig::input, "scenario (or flow) CSV");
  bind_member(app, b, "--theta", &RunConfig::theta, "uncertain-input CSV");
  bind_member(app, b, "--meta", &RunConfig::meta, "column metadata JSON");
  bind_member(app, b, "--labels", &RunConfig::labels, "assignment CSV with cluster labels");
  bind_member(app, b, "--tree", &RunConfig::tree, "tree JSON to render");
  bind_member(app, b, "--out", &RunConfig::out, "output directory");
  bind_member(app, b, "--seed", &RunConfig::seed, "top-level random seed");
  bind<std::size_t>(app, b, "--k", "number of clusters", [](RunConfig& c, std::size_t v) { c.k = v; });
  bind_member(app, b, "--k-min", &RunConfig::k_min, "smallest k for elbow/advise");
  bind_member(app, b, "--k-max", &RunConfig::k_max, "largest k for elbow/advise");
  bind_member(app, b, "--restarts", &RunConfig::restarts, "k-means restarts");
  bind_member(app, b, "--max-iter", &RunConfig::max_iter, "Lloyd iteration cap");
  bind_member(app, b, "--tol", &RunConfig::tol, "center-shift convergence tolerance");
  bind_member(app, b, "--max-leaves", &RunConfig::max_leaves, "leaf cap of the storyline tree (default k)");
  bind_member(app, b, "--impurity", &RunConfig::impurity, "gini or entropy");
  bind_member(app, b, "--lock-partial", &RunConfig::lock_partial, "range ratio at or below which a lock is partial");
  bind_member(app, b, "--lock-locked", &RunConfig::lock_locked, "range ratio at or below which a lock is locked");
  bind_member(app, b, "--folds", &RunConfig::folds, "cross-validation folds");
  bind_member(app, b, "--leaf-budgets", &RunConfig::leaf_budgets, "discovery leaf budgets, e.g. 2-30 or 2,4,8");
  bind_member(app, b, "--select-margin", &RunConfig::select_margin, "cv-coverage margin for tree selection");
  bind_member(app, b, "--rule", &RunConfig::rule, "screening rule: threshold=<v> or top=<n>");
  bind_member(app, b, "--statistic", &RunConfig::statistic, "screening statistic: range or variance");
  bind_member(app, b, "--blobs", &RunConfig::blobs, "synth: number of blobs");
  bind_member(app, b, "--n", &RunConfig::n, "synth: number of scenarios");
  bind_member(app, b, "--m", &RunConfig::m, "synth: number of outputs of interest");
  bind_member(app, b, "--p", &RunConfig::p, "synth: number of uncertain inputs");
  bind_member(app, b, "--noise", &RunConfig::noise, "synth: label noise fraction");
  bind_member(app, b, "--separation", &RunConfig::separation, "synth: blob spacing in standard deviations");
  bind_member(app, b, "--driver-a", &RunConfig::driver_a, "synth: first driver column");
  bind_member(app, b, "--driver-b", &RunConfig::driver_b, "synth: second driver column");
  bind_member(app, b, "--jobs", &RunConfig::jobs, "worker thread cap (0 = default)");
}

std::string one_line(std::string s) {
  for (char& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::string out;
  for (char ch : s) out += ch == '"' ? std::string("\\\"") : std::string(1, ch);
  return out;
}

int report_error(std::ostream& err, ErrorKind kind, const std::string& message) {
  err << "error kind=" << to_string(kind) << " exit=" << static_cast<int>(kind) << " message=\"" << one_line(message)
      << "\"\n";
  return static_cast<int>(kind);
}

}  // namespace

ordered_json to_json(const RunConfig& config) {
  ordered_json doc;
  visit_fields(config, [&](const char* key, const auto& value) {
    using T = std::decay_t<decltype(value)>;
    if constexpr (std::is_same_v<T, std::optional<std::size_t>>) {
      doc[key] = value ? ordered_json(*value) : ordered_json(nullptr);
    } else {
      doc[key] = value;
    }
  });
  doc["out"] = config.out;
  return doc;
}

void merge_json(RunConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw UsageError("configuration must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    bool known = key == "out";
    if (known) config.out = value.get<std::string>();
    visit_fields(config, [&](const char* name, auto& member) {
      if (key != name) return;
      known = true;
      using T = std::decay_t<decltype(member)>;
      try {
        if constexpr (std::is_same_v<T, std::optional<std::size_t>>) {
          member = value.is_null() ? std::nullopt : std::optional<std::size_t>(value.get<std::size_t>());
        } else {
          member = value.get<T>();
        }
      } catch (const nlohmann::json::exception&) {
        throw UsageError("configuration key '" + key + "' has the wrong type");
      }
    });
    if (!known) throw UsageError("unknown configuration key '" + key + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  const auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (s.empty() || pos != s.size()) throw UsageError("cannot parse '" + s + "' in list '" + text + "'");
    return static_cast<std::size_t>(v);
  };
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto dots = part.find("..");
    const auto dash = part.find('-');
    if (dots != std::string::npos || dash != std::string::npos) {
      const auto cut = dots != std::string::npos ? dots : dash;
      const auto len = dots != std::string::npos ? 2 : 1;
      const std::size_t lo = number(part.substr(0, cut));
      const std::size_t hi = number(part.substr(cut + len));
      if (hi < lo) throw UsageError("empty range '" + part + "'");
      for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(number(part));
    }
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

int run_command(const RunConfig& config, std::ostream& out) {
#ifdef _OPENMP
  if (config.jobs > 0) omp_set_num_threads(static_cast<int>(config.jobs));
#endif
  const std::string& c = config.command;
  if (c == "pipeline") return cmd_pipeline(config, out);
  if (c == "elbow") return cmd_elbow(config, out);
  if (c == "advise") return cmd_advise(config, out);
  if (c == "discover") return cmd_discover(config, out);
  if (c == "screen") return cmd_screen(config, out);
  if (c == "synth") return cmd_synth(config, out);
  if (c == "render") return cmd_render(config, out);
  throw UsageError("unknown command '" + c + "'");
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Condense scenario ensembles into decision-tree storylines"};
  app.require_subcommand(1);
  Bindings bindings;
  std::string config_path;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"pipeline", "cluster, fit the storyline tree, reorder, and write all reports"},
      {"elbow", "distance measure vs. k, before and after reordering"},
      {"advise", "elbow values plus split-repetition diagnostics per k"},
      {"discover", "scenario discovery: which uncertain inputs drive the storylines"},
      {"screen", "rank candidate outputs of interest by range of variation"},
      {"synth", "write a seeded synthetic scenario ensemble"},
      {"render", "re-render text, DOT and radar figures from a tree JSON"},
  };
  for (const auto& [name, help] : commands) add_shared_flags(app.add_subcommand(name, help), bindings, config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    return report_error(err, ErrorKind::Usage, e.what());
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw UsageError(config_path + ": " + e.what());
      }
      merge_json(config, doc);
    }
    for (const auto& apply : bindings.apply) apply(config);
    config.command = app.get_subcommands().front()->get_name();
    return run_command(config, out);
  } catch (const Error& e) {
    return report_error(err, e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(err, ErrorKind::Data, e.what());
  } catch (const nlohmann::json::exception& e) {
    return report_error(err, ErrorKind::Data, e.what());
  } catch (const std::exception& e) {
    return report_error(err, ErrorKind::Invariant, e.what());
  }
}

}  // namespace storyline
