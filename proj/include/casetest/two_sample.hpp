#pragma once

#include <cstdint>
#include <vector>

#include "casetest/graph_models.hpp"

namespace casetest {

/// Statistic computed on the embedded samples. GaussianMmd is the default;
/// Energy is the interchangeable distance-based alternative.
enum class StatisticKind { GaussianMmd, Energy };

struct KernelConfig {
  bool use_median = false;
  double sigma = 0.5;
  StatisticKind statistic = StatisticKind::GaussianMmd;

  static KernelConfig fixed(double sigma, StatisticKind kind = StatisticKind::GaussianMmd);
  static KernelConfig median(StatisticKind kind = StatisticKind::GaussianMmd);
};

struct TestResult {
  double statistic = 0.0;
  std::vector<double> permutation_statistics;
  double p_value = 1.0;
  int n = 0;
  int m = 0;
  double bandwidth_used = 0.0;  // 0 for the energy statistic
  std::uint64_t seed = 0;
};

/// exp(-|t - t'|^2 / (2 sigma^2)); radial, hence invariant to a common
/// orthogonal transform of both arguments.
double gaussian_kernel(const Vector& t, const Vector& t_prime, double sigma);

/// Lower median of the Euclidean distances over all unordered distinct pairs
/// of the pooled rows. Throws DegenerateSampleError when the median is zero.
double median_heuristic(const Matrix& x, const Matrix& y);

/// Unbiased kernel two-sample statistic
///   T = mean_{i != j} k(x_i, x_j) - 2 mean_{i,j} k(x_i, y_j) + mean_{i != j} k(y_i, y_j).
/// Each sum is accumulated in a canonical (sorted) order, so the result is
/// exactly symmetric in (x, y) and exactly invariant to row permutations.
double mmd_statistic(const Matrix& x, const Matrix& y, double sigma);

/// Energy-distance analogue with unbiased within-sample means:
///   E = 2 mean |x - y| - mean_{i != j} |x_i - x_j| - mean_{i != j} |y_i - y_j|.
double energy_statistic(const Matrix& x, const Matrix& y);

/// Pairwise values over the pooled rows, cached once per test and re-scored
/// per permutation. Rebuilding is only needed when the points change.
class PooledPairwiseCache {
 public:
  PooledPairwiseCache(const Matrix& x, const Matrix& y, const KernelConfig& config);

  int n() const { return n_; }
  int m() const { return m_; }
  double bandwidth() const { return bandwidth_; }
  StatisticKind kind() const { return kind_; }

  /// Statistic for a 0/1 group assignment over the pooled rows (1 = first
  /// sample); exactly n entries must be 1.
  double statistic(const std::vector<double>& group_one) const;

 private:
  double pair_value(int i, int j) const;  // packed upper-triangle lookup

  int n_ = 0, m_ = 0;
  double bandwidth_ = 0.0;
  StatisticKind kind_ = StatisticKind::GaussianMmd;
  std::vector<double> upper_;     // row-major packed strict upper triangle
  std::vector<double> row_sums_;  // sum of each packed row
};

/// Permutation test: resolves the bandwidth once on the observed pooled
/// sample, scores B uniform re-splits of the pooled rows, and returns the
/// add-one p-value (1 + #{T_b >= T_obs}) / (1 + B).
TestResult permutation_test(const Matrix& x, const Matrix& y, const KernelConfig& config,
                            int permutations, RandomStream rng);

/// Same test on a prebuilt cache (for workflows repeating permutations over
/// fixed embeddings).
TestResult permutation_test(const PooledPairwiseCache& cache, int permutations,
                            RandomStream rng);

}  // namespace casetest
