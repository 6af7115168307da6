#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace storyline {

/// Everything a command needs. Serializable to JSON; the echoed copy in the
/// output directory re-runs the same command (pass --out again).
struct RunConfig {
  std::string command;
  std::string input;
  std::string theta;
  std::string meta;
  std::string labels;  ///< discover: assignment CSV to take cluster labels from
  std::string tree;    ///< render: tree JSON to re-render
  std::string out = "out";

  std::uint64_t seed = 0;
  std::optional<std::size_t> k;
  std::size_t k_min = 1;
  std::size_t k_max = 10;
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t max_leaves = 0;  ///< 0 means k
  std::string impurity = "gini";
  double lock_partial = 2.0 / 3.0;
  double lock_locked = 1.0 / 3.0;

  std::size_t folds = 5;
  std::string leaf_budgets = "2-30";
  double select_margin = 0.02;

  std::string rule;
  std::string statistic = "range";

  std::size_t blobs = 3;
  std::size_t n = 1000;
  std::size_t m = 5;
  std::size_t p = 10;
  double noise = 0.0;
  double separation = 6.0;
  std::size_t driver_a = 2;
  std::size_t driver_b = 7;

  std::size_t jobs = 0;  ///< 0 keeps the OpenMP default
};

nlohmann::ordered_json to_json(const RunConfig& config);
/// Overlays the keys present in `doc` onto `config`. Unknown keys are a usage error.
void merge_json(RunConfig& config, const nlohmann::json& doc);

/// Parses "2-30", "2..30" or "2,4,8".
std::vector<std::size_t> parse_size_list(const std::string& text);

/// Seed offsets derived from the single top-level seed.
struct SeedPlan {
  static constexpr std::uint64_t kClustering = 0;
  static constexpr std::uint64_t kFolds = 1;
  static constexpr std::uint64_t kSynth = 0;
};

int run_command(const RunConfig& config, std::ostream& out);

/// Full CLI entry point. Exit codes: 0 success, 2 usage, 3 data, 4 invariant.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace storyline
