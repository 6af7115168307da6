#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "storyline/scenario.hpp"

namespace storyline {

/// Synthetic stand-in for a scenario ensemble.
///
/// Uncertain inputs are i.i.d. uniform on [0, 1]. A scenario's cluster is a
/// two-threshold function of the driver columns: theta[a] <= 0.5 picks the
/// left group of ceil(B/2) labels (split further by theta[b]), otherwise the
/// right group of floor(B/2) labels. With probability `noise` the label is
/// replaced by a uniformly drawn different one. Outputs of interest are then
/// Gaussian blobs around per-label centers whose coordinates sit on a grid of
/// spacing `separation` standard deviations, so every pair of blobs is apart
/// by at least that much along the first axis.
struct SynthSpec {
  std::size_t blobs = 3;
  std::size_t scenarios = 1000;
  std::size_t outputs = 5;
  std::size_t inputs = 10;
  double separation = 6.0;
  double noise = 0.0;
  std::uint64_t seed = 7;
  std::size_t driver_a = 2;
  std::size_t driver_b = 7;

  void validate() const;
};

struct SynthData {
  RawTable scenarios;
  RawTable theta;
  std::vector<int> labels;        ///< cluster each scenario was drawn from (after noise)
  std::vector<int> clean_labels;  ///< noiseless function of the driver columns
};

SynthData synthesize(const SynthSpec& spec);

/// Noiseless label rule used by `synthesize`.
int driver_label(double theta_a, double theta_b, std::size_t blobs) noexcept;

/// CSV text for a raw table (id column first, reals at 10 significant digits).
std::string to_csv(const RawTable& table);

}  // namespace storyline
