#include "storyline/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "storyline/error.hpp"

namespace storyline {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool is_id_column(const std::string& name) {
  return name == "id" || name == "scenario" || name == "scenario_id";
}

}  // namespace

RawTable parse_csv_table(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": missing header row");
  for (auto& h : header) h = unquote(h);
  if (!header.empty() && header.front().size() >= 3 && header.front().compare(0, 3, "\xEF\xBB\xBF") == 0) {
    header.front().erase(0, 3);
  }

  RawTable table;
  const bool has_ids = is_id_column(header.front());
  const std::size_t first = has_ids ? 1 : 0;
  for (std::size_t c = first; c < header.size(); ++c) {
    if (header[c].empty()) throw DataError(source + ": empty column name in header (column " + std::to_string(c + 1) + ")");
    table.names.push_back(header[c]);
  }
  table.columns.resize(table.names.size());

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError(source + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) + ") has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
    }
    if (has_ids) table.row_ids.push_back(unquote(cells[0]));
    for (std::size_t c = first; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0' || errno == ERANGE) {
        throw DataError(source + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                        "), column '" + header[c] + "': cannot parse '" + cell + "' as a number");
      }
      table.columns[c - first].push_back(v);
    }
  }
  if (has_ids) {
    std::set<std::string> seen;
    for (const auto& id : table.row_ids) {
      if (!seen.insert(id).second) throw DataError(source + ": duplicate scenario id '" + id + "'");
    }
  }
  return table;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RawTable read_csv_table(const std::filesystem::path& path) {
  return parse_csv_table(read_file(path), path.string());
}

Metadata parse_metadata(const std::string& json_text) {
  Metadata meta;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& col : doc.at("columns")) {
      const std::string name = col.at("name").get<std::string>();
      ColumnMeta m;
      if (col.contains("unit")) m.unit = col["unit"].get<std::string>();
      if (col.contains("kind")) m.kind = parse_output_kind(col["kind"].get<std::string>());
      if (col.contains("categorical")) m.categorical = col["categorical"].get<bool>();
      if (!meta.emplace(name, m).second) throw DataError("metadata lists column '" + name + "' twice");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metadata: ") + e.what());
  }
  return meta;
}

Metadata read_metadata(const std::filesystem::path& path) {
  try {
    return parse_metadata(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

namespace {

void attach_descriptors(RawTable& table, const Metadata& meta, OutputKind default_kind) {
  table.descriptors.clear();
  for (const auto& name : table.names) {
    OutputDescriptor d{name, "unitless", default_kind, false};
    if (auto it = meta.find(name); it != meta.end()) {
      d.unit = it->second.unit;
      d.kind = it->second.kind;
      d.categorical = it->second.categorical;
    }
    table.descriptors.push_back(std::move(d));
  }
}

// Reading one table alone: entries that describe the other table are not errors.
Metadata only_for(const Metadata& meta, bool theta) {
  Metadata out;
  for (const auto& [name, m] : meta) {
    if ((m.kind == OutputKind::UncertainInput) == theta) out.emplace(name, m);
  }
  return out;
}

DatasetBundle load_dataset(const std::filesystem::path& scenario_csv,
                           const std::optional<std::filesystem::path>& theta_csv, const Metadata& meta) {
  RawTable scen = read_csv_table(scenario_csv);
  std::optional<RawTable> theta;
  if (theta_csv) theta = read_csv_table(*theta_csv);

  std::set<std::string> known(scen.names.begin(), scen.names.end());
  if (theta) known.insert(theta->names.begin(), theta->names.end());
  for (const auto& [name, m] : meta) {
    if (!known.count(name)) throw DataError("metadata names column '" + name + "', which is not in the input");
  }

  attach_descriptors(scen, meta, OutputKind::OutputOfInterest);
  auto wrap = [](const std::filesystem::path& p, auto&& fn) {
    try {
      return fn();
    } catch (const DataError& e) {
      throw DataError(p.string() + ": " + e.what());
    }
  };
  DatasetBundle bundle{wrap(scenario_csv, [&] { return build_scenario_matrix(scen); }), std::nullopt};
  if (theta) {
    attach_descriptors(*theta, meta, OutputKind::UncertainInput);
    bundle.theta = wrap(*theta_csv, [&] { return build_uncertainty_matrix(*theta); });
    bundle.theta->check_aligned(bundle.scenarios);
  }
  return bundle;
}

}  // namespace

DatasetBundle read_dataset(const std::filesystem::path& scenario_csv,
                           const std::optional<std::filesystem::path>& theta_csv,
                           const std::optional<std::filesystem::path>& metadata) {
  return load_dataset(scenario_csv, theta_csv, metadata ? read_metadata(*metadata) : Metadata{});
}

ScenarioMatrix read_scenario_matrix(const std::filesystem::path& csv,
                                    const std::optional<std::filesystem::path>& metadata) {
  return load_dataset(csv, std::nullopt, only_for(metadata ? read_metadata(*metadata) : Metadata{}, false)).scenarios;
}

UncertaintyMatrix read_uncertainty_matrix(const std::filesystem::path& csv,
                                          const std::optional<std::filesystem::path>& metadata) {
  const Metadata meta = only_for(metadata ? read_metadata(*metadata) : Metadata{}, true);
  RawTable table = read_csv_table(csv);
  const std::set<std::string> known(table.names.begin(), table.names.end());
  for (const auto& [name, m] : meta) {
    if (!known.count(name)) throw DataError("metadata names column '" + name + "', which is not in the input");
  }
  attach_descriptors(table, meta, OutputKind::UncertainInput);
  try {
    return build_uncertainty_matrix(table);
  } catch (const DataError& e) {
    throw DataError(csv.string() + ": " + e.what());
  }
}

std::string format_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

double round_significant(double value, int digits) {
  return std::strtod(format_significant(value, digits).c_str(), nullptr);
}

namespace {

ordered_json optional_real(const std::optional<double>& v) {
  return v ? ordered_json(round_significant(*v)) : ordered_json(nullptr);
}

}  // namespace

std::string export_tree_json(const StorylineTree& tree, const TreeMeta& meta) {
  const std::size_t m = tree.features.size();
  const auto& root_ranges = tree.nodes.at(tree.root).summary.ranges;
  std::vector<Range> root_rounded(m);
  for (std::size_t j = 0; j < m; ++j) {
    root_rounded[j] = {round_significant(root_ranges[j].min), round_significant(root_ranges[j].max)};
  }

  ordered_json nodes = ordered_json::array();
  for (const auto& node : tree.nodes) {
    ordered_json n;
    const bool leaf = node.is_leaf();
    n["id"] = node.id;
    n["kind"] = leaf ? "leaf" : "internal";
    n["feature"] = leaf ? ordered_json(nullptr) : ordered_json(tree.features[node.feature].name);
    n["threshold_normalized"] = leaf ? ordered_json(nullptr) : ordered_json(node.threshold);
    n["threshold_raw"] = leaf ? ordered_json(nullptr) : ordered_json(round_significant(node.threshold_raw));
    n["label"] = leaf ? ordered_json(node.label) : ordered_json(nullptr);
    n["count"] = node.member_count;

    std::vector<Range> rounded(m);
    for (std::size_t j = 0; j < m; ++j) {
      rounded[j] = {round_significant(node.summary.ranges[j].min), round_significant(node.summary.ranges[j].max)};
    }
    bool degenerate_root = false;
    for (const auto& r : root_rounded) degenerate_root |= !(r.width() > 0.0);
    const double sigma = degenerate_root ? node.summary.sigma : decision_space_fraction(rounded, root_rounded);
    n["sigma"] = round_significant(sigma);

    ordered_json ranges = ordered_json::array();
    for (std::size_t j = 0; j < m; ++j) {
      ordered_json r;
      r["name"] = tree.features[j].name;
      r["min"] = rounded[j].min;
      r["max"] = rounded[j].max;
      r["lock"] = to_string(node.summary.locks[j]);
      ranges.push_back(std::move(r));
    }
    n["ranges"] = std::move(ranges);
    n["left"] = leaf ? ordered_json(nullptr) : ordered_json(node.left);
    n["right"] = leaf ? ordered_json(nullptr) : ordered_json(node.right);
    nodes.push_back(std::move(n));
  }

  ordered_json doc;
  doc["nodes"] = std::move(nodes);
  doc["root"] = tree.root;
  ordered_json mj;
  mj["k"] = meta.k;
  mj["d_before"] = optional_real(meta.d_before);
  mj["d_after"] = optional_real(meta.d_after);
  mj["seed"] = meta.seed ? ordered_json(*meta.seed) : ordered_json(nullptr);
  mj["max_leaves"] = tree.max_leaves;
  ordered_json features = ordered_json::array();
  for (const auto& d : tree.features) {
    ordered_json f;
    f["name"] = d.name;
    f["unit"] = d.unit;
    features.push_back(std::move(f));
  }
  mj["features"] = std::move(features);
  doc["meta"] = std::move(mj);
  return doc.dump(2) + "\n";
}

ParsedTree parse_tree_json(const std::string& json_text) {
  ParsedTree out;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    const auto& meta = doc.at("meta");
    out.meta.k = meta.at("k").get<std::size_t>();
    if (!meta.at("d_before").is_null()) out.meta.d_before = meta["d_before"].get<double>();
    if (!meta.at("d_after").is_null()) out.meta.d_after = meta["d_after"].get<double>();
    if (!meta.at("seed").is_null()) out.meta.seed = meta["seed"].get<std::uint64_t>();
    out.tree.max_leaves = meta.at("max_leaves").get<std::size_t>();
    for (const auto& f : meta.at("features")) {
      out.tree.features.push_back({f.at("name").get<std::string>(), f.at("unit").get<std::string>()});
    }
    const auto feature_index = [&](const std::string& name) {
      for (std::size_t j = 0; j < out.tree.features.size(); ++j) {
        if (out.tree.features[j].name == name) return j;
      }
      throw DataError("tree node splits on unknown feature '" + name + "'");
    };

    out.tree.root = doc.at("root").get<std::size_t>();
    for (const auto& n : doc.at("nodes")) {
      TreeNode node;
      node.id = n.at("id").get<std::size_t>();
      if (node.id != out.tree.nodes.size()) throw DataError("tree nodes must be listed in id order");
      node.kind = n.at("kind").get<std::string>() == "leaf" ? NodeKind::Leaf : NodeKind::Internal;
      node.member_count = n.at("count").get<std::size_t>();
      node.summary.count = node.member_count;
      node.summary.sigma = n.at("sigma").get<double>();
      for (const auto& r : n.at("ranges")) {
        node.summary.ranges.push_back({r.at("min").get<double>(), r.at("max").get<double>()});
        node.summary.locks.push_back(parse_lock_level(r.at("lock").get<std::string>()));
      }
      if (node.is_leaf()) {
        node.label = n.at("label").get<int>();
      } else {
        node.feature = feature_index(n.at("feature").get<std::string>());
        node.threshold = n.at("threshold_normalized").get<double>();
        node.threshold_raw = n.at("threshold_raw").get<double>();
        node.left = n.at("left").get<std::size_t>();
        node.right = n.at("right").get<std::size_t>();
      }
      out.tree.nodes.push_back(std::move(node));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tree document: ") + e.what());
  }
  for (const auto& node : out.tree.nodes) {
    if (!node.is_leaf() && (node.left >= out.tree.nodes.size() || node.right >= out.tree.nodes.size())) {
      throw DataError("tree node " + std::to_string(node.id) + " references a missing child");
    }
  }
  if (out.tree.root >= out.tree.nodes.size()) throw DataError("tree root is not a node");
  return out;
}

namespace {

std::string unit_suffix(const std::string& unit) {
  return unit.empty() || unit == "unitless" ? std::string() : " " + unit;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

void render_node(const StorylineTree& tree, std::size_t id, std::size_t depth, const std::string& prefix,
                 std::string& out) {
  const TreeNode& node = tree.nodes[id];
  const std::string indent(2 * depth, ' ');
  const std::string stats = " (n=" + std::to_string(node.member_count) + ", Σ=" + fixed3(node.summary.sigma) + ")";
  if (node.is_leaf()) {
    out += indent + prefix + "Storyline " + std::to_string(node.label) + stats + "\n";
    return;
  }
  const auto& f = tree.features[node.feature];
  out += indent + prefix + f.name + " ≤ " + format_significant(node.threshold_raw) + unit_suffix(f.unit) + stats + "\n";
  render_node(tree, node.left, depth + 1, "yes: ", out);
  render_node(tree, node.right, depth + 1, "no:  ", out);
}

}  // namespace

std::string render_tree_text(const StorylineTree& tree) {
  std::string out;
  render_node(tree, tree.root, 0, "", out);
  return out;
}

std::string export_tree_dot(const StorylineTree& tree) {
  std::ostringstream out;
  out << "digraph storyline {\n  node [shape=box, fontname=\"Helvetica\"];\n";
  for (const auto& node : tree.nodes) {
    out << "  n" << node.id << " [label=\"";
    if (node.is_leaf()) {
      out << "Storyline " << node.label;
    } else {
      const auto& f = tree.features[node.feature];
      out << f.name << " <= " << format_significant(node.threshold_raw) << unit_suffix(f.unit);
    }
    out << "\\nn=" << node.member_count << ", sigma=" << fixed3(node.summary.sigma) << "\"];\n";
  }
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) continue;
    out << "  n" << node.id << " -> n" << node.left << " [label=\"yes\"];\n";
    out << "  n" << node.id << " -> n" << node.right << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace storyline
