#pragma once

// Shared generators and brute-force oracles for the test binaries.
// Nothing here calls into the code under test except to build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "storyline/commands.hpp"
#include "storyline/matrix.hpp"
#include "storyline/random.hpp"

namespace storyline::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = rng.uniform();
  return out;
}

// Values on a coarse grid so that ties and repeated values show up.
inline Matrix grid_matrix(Rng& rng, std::size_t rows, std::size_t cols, std::uint64_t levels) {
  Matrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = static_cast<double>(rng.below(levels)) / 4.0;
  return out;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t n, int classes) {
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return out;
}

// Unit-sigma Gaussian blobs, row i drawn from blob i % k.
inline Matrix blob_matrix(std::uint64_t seed, std::size_t n, std::size_t m, std::size_t k, double sep,
                          std::vector<int>* truth = nullptr) {
  Rng rng(seed);
  Matrix centers(k, m);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < m; ++j) centers(c, j) = sep * static_cast<double>((c * (j + 1) + j) % k);
  Matrix out(n, m);
  if (truth) truth->assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % k;
    if (truth) (*truth)[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < m; ++j) out(i, j) = centers(c, j) + rng.normal();
  }
  return out;
}

inline double sq(double x) { return x * x; }

// Within-cluster sum of squares, straight double loop over clusters then rows.
inline double brute_distance(const Matrix& points, const std::vector<int>& labels, const Matrix& centers) {
  double total = 0.0;
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
      if (labels[i] != static_cast<int>(c)) continue;
      for (std::size_t j = 0; j < points.cols(); ++j) total += sq(points(i, j) - centers(c, j));
    }
  }
  return total;
}

inline double partition_cost(const Matrix& points, const std::vector<int>& labels, int k) {
  Matrix centers(static_cast<std::size_t>(k), points.cols());
  std::vector<double> count(static_cast<std::size_t>(k), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    count[static_cast<std::size_t>(labels[i])] += 1.0;
    for (std::size_t j = 0; j < points.cols(); ++j) centers(static_cast<std::size_t>(labels[i]), j) += points(i, j);
  }
  for (std::size_t c = 0; c < centers.rows(); ++c)
    for (std::size_t j = 0; j < points.cols(); ++j) centers(c, j) /= count[c];
  return brute_distance(points, labels, centers);
}

// Optimal 2-means cost by enumerating every non-trivial bipartition.
inline double exhaustive_two_means(const Matrix& points) {
  const std::size_t n = points.rows();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels(n);
  // row 0 pinned to cluster 0 to skip mirrored partitions
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    labels[0] = 0;
    for (std::size_t i = 1; i < n; ++i) labels[i] = static_cast<int>((mask >> (i - 1)) & 1U);
    best = std::min(best, partition_cost(points, labels, 2));
  }
  return best;
}

// Exact rational with a positive denominator.
struct Fraction {
  __extension__ typedef __int128 wide;
  wide num = 0;
  wide den = 1;
  static wide gcd(wide a, wide b) {
    if (a < 0) a = -a;
    while (b != 0) {
      const wide t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static Fraction make(wide n, wide d) {
    if (d < 0) n = -n, d = -d;
    const wide g = gcd(n, d);
    return {n / g, d / g};
  }
  friend Fraction operator-(Fraction a, Fraction b) { return make(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Fraction operator*(Fraction a, Fraction b) { return make(a.num * b.num, a.den * b.den); }
  friend bool operator<(Fraction a, Fraction b) { return a.num * b.den < b.num * a.den; }
  friend bool operator==(Fraction a, Fraction b) { return a.num == b.num && a.den == b.den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// 1 - sum_c (n_c / n)^2
inline Fraction gini_of(const std::vector<long>& counts, long n) {
  Fraction g{1, 1};
  for (long c : counts) g = g - Fraction::make(static_cast<Fraction::wide>(c) * c, static_cast<Fraction::wide>(n) * n);
  return g;
}

struct BruteSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  Fraction decrease;
};

// Every feature, every midpoint between consecutive distinct values; counts
// recomputed from scratch per candidate. First strictly best wins.
inline std::optional<BruteSplit> brute_split(const Matrix& x, const std::vector<int>& labels, int classes) {
  const long n = static_cast<long>(x.rows());
  std::vector<long> all(static_cast<std::size_t>(classes), 0);
  for (int l : labels) ++all[static_cast<std::size_t>(l)];
  const Fraction parent = gini_of(all, n);
  std::optional<BruteSplit> best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::set<double> distinct;
    for (std::size_t i = 0; i < x.rows(); ++i) distinct.insert(x(i, f));
    std::vector<double> v(distinct.begin(), distinct.end());
    for (std::size_t t = 0; t + 1 < v.size(); ++t) {
      double thr = 0.5 * (v[t] + v[t + 1]);
      if (!(thr < v[t + 1])) thr = v[t];
      std::vector<long> left(static_cast<std::size_t>(classes), 0), right(left);
      long nl = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, f) <= thr) {
          ++left[static_cast<std::size_t>(labels[i])];
          ++nl;
        } else {
          ++right[static_cast<std::size_t>(labels[i])];
        }
      }
      const long nr = n - nl;
      const Fraction dec = parent - Fraction::make(nl, n) * gini_of(left, nl) - Fraction::make(nr, n) * gini_of(right, nr);
      if (!(Fraction{0, 1} < dec)) continue;
      if (!best || best->decrease < dec) best = BruteSplit{f, thr, dec};
    }
  }
  return best;
}

// Screening oracle: full sort on (-range, name), then apply the rule.
struct BruteScreen {
  std::vector<std::string> order;
  std::vector<std::string> selected;
};

inline BruteScreen brute_screen(const std::vector<std::string>& names, const std::vector<double>& ranges,
                                std::optional<double> threshold, std::size_t top_n) {
  std::vector<std::size_t> idx(names.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (ranges[a] != ranges[b]) return ranges[a] > ranges[b];
    return names[a] < names[b];
  });
  BruteScreen out;
  for (std::size_t rank = 0; rank < idx.size(); ++rank) {
    const std::size_t i = idx[rank];
    out.order.push_back(names[i]);
    const bool pick = threshold ? ranges[i] > *threshold : rank < top_n;
    if (pick) out.selected.push_back(names[i]);
  }
  return out;
}

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "storyline");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("storyline-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const { return child.empty() ? path_.string() : (path_ / child).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace storyline::testing
