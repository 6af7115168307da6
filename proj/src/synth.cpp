#include "storyline/synth.hpp"

#include <cmath>
#include <cstdio>

#include "storyline/error.hpp"
#include "storyline/random.hpp"

namespace storyline {

void SynthSpec::validate() const {
  if (blobs < 1) throw UsageError("need at least one blob");
  if (scenarios < 2) throw UsageError("need at least 2 scenarios");
  if (outputs < 1) throw UsageError("need at least one output");
  if (inputs < 2) throw UsageError("need at least two uncertain inputs");
  if (driver_a >= inputs || driver_b >= inputs || driver_a == driver_b) {
    throw UsageError("driver columns must be two distinct indices below the input count");
  }
  if (!(separation > 0.0)) throw UsageError("separation must be positive");
  if (!(noise >= 0.0 && noise <= 1.0)) throw UsageError("noise must lie in [0, 1]");
}

int driver_label(double theta_a, double theta_b, std::size_t blobs) noexcept {
  if (blobs <= 1) return 0;
  const std::size_t left = (blobs + 1) / 2;
  const std::size_t right = blobs / 2;
  const auto bin = [](double u, std::size_t bins) {
    return std::min(static_cast<std::size_t>(u * static_cast<double>(bins)), bins - 1);
  };
  if (theta_a <= 0.5) return static_cast<int>(bin(theta_b, left));
  return static_cast<int>(left + bin(theta_b, right));
}

SynthData synthesize(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.scenarios;
  SynthData data;

  Rng theta_rng(derive_seed(spec.seed, 0));
  data.theta.columns.assign(spec.inputs, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < spec.inputs; ++c) data.theta.columns[c][i] = theta_rng.uniform();
  }
  for (std::size_t c = 0; c < spec.inputs; ++c) data.theta.names.push_back("theta" + std::to_string(c));

  Rng label_rng(derive_seed(spec.seed, 1));
  for (std::size_t i = 0; i < n; ++i) {
    const int clean = driver_label(data.theta.columns[spec.driver_a][i], data.theta.columns[spec.driver_b][i], spec.blobs);
    int label = clean;
    // Both draws happen for every row so the stream does not depend on `noise`.
    const double flip = label_rng.uniform();
    const auto other = static_cast<int>(label_rng.below(spec.blobs > 1 ? spec.blobs - 1 : 1));
    if (spec.blobs > 1 && flip < spec.noise) label = other >= clean ? other + 1 : other;
    data.clean_labels.push_back(clean);
    data.labels.push_back(label);
  }

  Rng blob_rng(derive_seed(spec.seed, 2));
  const std::size_t b = spec.blobs;
  data.scenarios.columns.assign(spec.outputs, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::size_t>(data.labels[i]);
    for (std::size_t d = 0; d < spec.outputs; ++d) {
      const double center = spec.separation * static_cast<double>((label * (d + 1) + d) % b);
      const double scale = static_cast<double>(d + 1);
      data.scenarios.columns[d][i] = 10.0 * static_cast<double>(d) + scale * (center + blob_rng.normal());
    }
  }
  for (std::size_t d = 0; d < spec.outputs; ++d) data.scenarios.names.push_back("y" + std::to_string(d));

  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", i + 1);
    data.scenarios.row_ids.emplace_back(id);
  }
  data.theta.row_ids = data.scenarios.row_ids;
  return data;
}

std::string to_csv(const RawTable& table) {
  std::string out;
  const bool ids = !table.row_ids.empty();
  if (ids) out += "id";
  for (std::size_t c = 0; c < table.names.size(); ++c) out += (c || ids ? "," : "") + table.names[c];
  out += "\n";
  const std::size_t n = table.columns.empty() ? 0 : table.columns.front().size();
  char buf[64];
  for (std::size_t r = 0; r < n; ++r) {
    if (ids) out += table.row_ids[r];
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.10g", table.columns[c][r]);
      out += (c || ids ? "," : "");
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace storyline
