#include "casetest/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "casetest/errors.hpp"
#include "casetest/spectral.hpp"

namespace casetest {

namespace {

// Canonical-order accumulation: summing sorted values makes the result
// independent of how the pairs were enumerated, which gives the exact
// argument-swap and row-permutation invariances of the statistic.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

void check_two_samples(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw DimensionError("two-sample statistic: dimension mismatch");
  if (x.rows() < 2 || y.rows() < 2) {
    throw SampleSizeError("two-sample statistic: need at least two rows per sample");
  }
}

double pair_statistic(double within_x, double within_y, double cross, double n, double m,
                      StatisticKind kind) {
  const double tx = 2.0 * within_x / (n * (n - 1.0));
  const double ty = 2.0 * within_y / (m * (m - 1.0));
  const double tc = 2.0 * cross / (n * m);
  // combine in a value-canonical order so swapping the samples is exact
  const double lo = std::min(tx, ty);
  const double hi = std::max(tx, ty);
  if (kind == StatisticKind::GaussianMmd) return (lo + hi) - tc;
  return tc - lo - hi;  // energy distance: reject for large cross distances
}

}  // namespace

KernelConfig KernelConfig::fixed(double sigma, StatisticKind kind) {
  KernelConfig c;
  c.use_median = false;
  c.sigma = sigma;
  c.statistic = kind;
  return c;
}

KernelConfig KernelConfig::median(StatisticKind kind) {
  KernelConfig c;
  c.use_median = true;
  c.sigma = 0.0;
  c.statistic = kind;
  return c;
}

double gaussian_kernel(const Vector& t, const Vector& t_prime, double sigma) {
  if (t.size() != t_prime.size()) throw DimensionError("gaussian_kernel: dimension mismatch");
  if (!(sigma > 0.0)) throw ParameterError("gaussian_kernel: bandwidth must be positive");
  return std::exp(-(t - t_prime).squaredNorm() / (2.0 * sigma * sigma));
}

double median_heuristic(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw DimensionError("median_heuristic: dimension mismatch");
  const long n = x.rows(), m = y.rows();
  if (n + m < 2) throw SampleSizeError("median_heuristic: need at least two pooled rows");
  Matrix pool(n + m, x.cols());
  pool.topRows(n) = x;
  pool.bottomRows(m) = y;
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>((n + m) * (n + m - 1) / 2));
  for (long i = 0; i + 1 < n + m; ++i) {
    for (long j = i + 1; j < n + m; ++j) {
      sq.push_back((pool.row(i) - pool.row(j)).squaredNorm());
    }
  }
  // sqrt is monotone, so the lower median commutes with it.
  const double med = std::sqrt(lower_median(std::move(sq)));
  if (med <= 0.0) {
    throw DegenerateSampleError("median_heuristic: zero median distance (all points identical)");
  }
  return med;
}

double mmd_statistic(const Matrix& x, const Matrix& y, double sigma) {
  check_two_samples(x, y);
  if (!(sigma > 0.0)) throw ParameterError("mmd_statistic: bandwidth must be positive");
  const long n = x.rows(), m = y.rows();
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> xx, yy, xy;
  xx.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  yy.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  xy.reserve(static_cast<std::size_t>(n * m));
  for (long i = 0; i + 1 < n; ++i)
    for (long j = i + 1; j < n; ++j)
      xx.push_back(std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm()));
  for (long i = 0; i + 1 < m; ++i)
    for (long j = i + 1; j < m; ++j)
      yy.push_back(std::exp(-gamma * (y.row(i) - y.row(j)).squaredNorm()));
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j)
      xy.push_back(std::exp(-gamma * (x.row(i) - y.row(j)).squaredNorm()));
  return pair_statistic(sorted_sum(xx), sorted_sum(yy), sorted_sum(xy),
                        static_cast<double>(n), static_cast<double>(m),
                        StatisticKind::GaussianMmd);
}

double energy_statistic(const Matrix& x, const Matrix& y) {
  check_two_samples(x, y);
  const long n = x.rows(), m = y.rows();
  std::vector<double> xx, yy, xy;
  xx.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  yy.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  xy.reserve(static_cast<std::size_t>(n * m));
  for (long i = 0; i + 1 < n; ++i)
    for (long j = i + 1; j < n; ++j) xx.push_back((x.row(i) - x.row(j)).norm());
  for (long i = 0; i + 1 < m; ++i)
    for (long j = i + 1; j < m; ++j) yy.push_back((y.row(i) - y.row(j)).norm());
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < m; ++j) xy.push_back((x.row(i) - y.row(j)).norm());
  return pair_statistic(sorted_sum(xx), sorted_sum(yy), sorted_sum(xy),
                        static_cast<double>(n), static_cast<double>(m), StatisticKind::Energy);
}

PooledPairwiseCache::PooledPairwiseCache(const Matrix& x, const Matrix& y,
                                         const KernelConfig& config) {
  check_two_samples(x, y);
  n_ = static_cast<int>(x.rows());
  m_ = static_cast<int>(y.rows());
  kind_ = config.statistic;
  const long total = n_ + m_;
  Matrix pool(total, x.cols());
  pool.topRows(n_) = x;
  pool.bottomRows(m_) = y;

  upper_.resize(static_cast<std::size_t>(total * (total - 1) / 2));
  std::size_t offset = 0;
  for (long i = 0; i + 1 < total; ++i) {
    const long len = total - 1 - i;
    Eigen::Map<Vector> slot(upper_.data() + offset, len);
    slot = (pool.bottomRows(len).rowwise() - pool.row(i)).rowwise().squaredNorm();
    offset += static_cast<std::size_t>(len);
  }

  if (kind_ == StatisticKind::GaussianMmd) {
    double sigma = config.sigma;
    if (config.use_median) {
      std::vector<double> copy(upper_);
      sigma = std::sqrt(lower_median(std::move(copy)));
      if (sigma <= 0.0) {
        throw DegenerateSampleError("permutation_test: zero median distance");
      }
    } else if (!(sigma > 0.0)) {
      throw ParameterError("permutation_test: bandwidth must be positive");
    }
    bandwidth_ = sigma;
    const double gamma = 1.0 / (2.0 * sigma * sigma);
    for (double& v : upper_) v = std::exp(-gamma * v);
  } else {
    bandwidth_ = 0.0;
    for (double& v : upper_) v = std::sqrt(v);
  }

  row_sums_.assign(static_cast<std::size_t>(total), 0.0);
  offset = 0;
  for (long i = 0; i + 1 < total; ++i) {
    const long len = total - 1 - i;
    row_sums_[static_cast<std::size_t>(i)] =
        Eigen::Map<const Vector>(upper_.data() + offset, len).sum();
    offset += static_cast<std::size_t>(len);
  }
}

double PooledPairwiseCache::statistic(const std::vector<double>& group_one) const {
  const long total = n_ + m_;
  if (static_cast<long>(group_one.size()) != total) {
    throw ParameterError("PooledPairwiseCache: group vector has wrong length");
  }
  double within_x = 0.0, within_y = 0.0, total_sum = 0.0;
  std::size_t offset = 0;
  for (long i = 0; i + 1 < total; ++i) {
    const long len = total - 1 - i;
    Eigen::Map<const Vector> row(upper_.data() + offset, len);
    Eigen::Map<const Vector> tail(group_one.data() + i + 1, len);
    const double dot = row.dot(tail);
    const double gi = group_one[static_cast<std::size_t>(i)];
    within_x += gi * dot;
    within_y += (1.0 - gi) * (row_sums_[static_cast<std::size_t>(i)] - dot);
    total_sum += row_sums_[static_cast<std::size_t>(i)];
    offset += static_cast<std::size_t>(len);
  }
  const double cross = total_sum - within_x - within_y;
  return pair_statistic(within_x, within_y, cross, static_cast<double>(n_),
                        static_cast<double>(m_), kind_);
}

TestResult permutation_test(const PooledPairwiseCache& cache, int permutations,
                            RandomStream rng) {
  if (permutations < 1) throw ParameterError("permutation_test: need at least one permutation");
  const int total = cache.n() + cache.m();
  std::vector<double> observed(static_cast<std::size_t>(total), 0.0);
  std::fill(observed.begin(), observed.begin() + cache.n(), 1.0);

  TestResult result;
  result.n = cache.n();
  result.m = cache.m();
  result.bandwidth_used = cache.bandwidth();
  result.seed = rng.seed();
  result.statistic = cache.statistic(observed);
  result.permutation_statistics.resize(static_cast<std::size_t>(permutations));

  std::vector<double> group(observed);
  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    RandomStream shuffle_rng = rng.child(static_cast<std::uint64_t>(b));
    group = observed;
    for (int i = total - 1; i > 0; --i) {
      const auto j = static_cast<long>(shuffle_rng.next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(group[static_cast<std::size_t>(i)], group[static_cast<std::size_t>(j)]);
    }
    const double t = cache.statistic(group);
    result.permutation_statistics[static_cast<std::size_t>(b)] = t;
    if (t >= result.statistic) ++at_least;
  }
  result.p_value = (1.0 + at_least) / (1.0 + permutations);
  return result;
}

TestResult permutation_test(const Matrix& x, const Matrix& y, const KernelConfig& config,
                            int permutations, RandomStream rng) {
  const PooledPairwiseCache cache(x, y, config);
  return permutation_test(cache, permutations, std::move(rng));
}

}  // namespace casetest
