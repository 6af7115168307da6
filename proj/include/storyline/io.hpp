#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storyline/scenario.hpp"
#include "storyline/tree.hpp"

namespace storyline {

/// Reads a comma-separated file with a header row. A first column named
/// "id", "scenario" or "scenario_id" holds scenario identifiers; every other
/// cell must parse completely as a decimal number.
RawTable read_csv_table(const std::filesystem::path& path);
RawTable parse_csv_table(const std::string& text, const std::string& source = "<memory>");

struct ColumnMeta {
  std::string unit = "unitless";
  OutputKind kind = OutputKind::OutputOfInterest;
  bool categorical = false;
};

using Metadata = std::map<std::string, ColumnMeta>;

/// {"columns": [{"name", "unit", "kind": "ooi"|"theta"|"flow", "categorical"}]}
Metadata parse_metadata(const std::string& json_text);
Metadata read_metadata(const std::filesystem::path& path);

struct DatasetBundle {
  ScenarioMatrix scenarios;
  std::optional<UncertaintyMatrix> theta;
};

/// Loads and validates the scenario matrix, the optional uncertainty matrix
/// and the optional metadata. Metadata naming a column found in neither file
/// is an error, as are misaligned scenario ids.
DatasetBundle read_dataset(const std::filesystem::path& scenario_csv,
                           const std::optional<std::filesystem::path>& theta_csv = std::nullopt,
                           const std::optional<std::filesystem::path>& metadata = std::nullopt);

/// Single-file readers with the same metadata handling as read_dataset.
ScenarioMatrix read_scenario_matrix(const std::filesystem::path& csv,
                                    const std::optional<std::filesystem::path>& metadata = std::nullopt);
UncertaintyMatrix read_uncertainty_matrix(const std::filesystem::path& csv,
                                          const std::optional<std::filesystem::path>& metadata = std::nullopt);

/// Round to `digits` significant decimal digits (through the decimal string).
double round_significant(double value, int digits = 6);
/// "%.<digits>g" rendering.
std::string format_significant(double value, int digits = 6);

struct TreeMeta {
  std::size_t k = 0;
  std::optional<double> d_before;
  std::optional<double> d_after;
  std::optional<std::uint64_t> seed;
};

/// Stable JSON document for a fitted tree. Keys are emitted in a fixed order
/// and reals are rounded to 6 significant digits, except threshold_normalized,
/// which keeps full precision so that routing survives a round trip. Each
/// node's sigma is recomputed from the rounded ranges it is printed with.
std::string export_tree_json(const StorylineTree& tree, const TreeMeta& meta);

struct ParsedTree {
  StorylineTree tree;
  TreeMeta meta;
};

ParsedTree parse_tree_json(const std::string& json_text);

/// Indented text rendering, one line per node.
std::string render_tree_text(const StorylineTree& tree);

/// Graphviz DOT of the tree topology.
std::string export_tree_dot(const StorylineTree& tree);

/// Writes `path.tmp` and renames it over `path`. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace storyline
