#include "casetest/correction.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "casetest/errors.hpp"

namespace casetest {

namespace {

constexpr double kMaxConditionNumber = 1e12;

Matrix symmetrized_second_moment(const Matrix& rows) {
  const double n = static_cast<double>(rows.rows());
  Matrix m = (rows.transpose() * rows) / n;
  return (m + m.transpose()) / 2.0;
}

Matrix invert_delta(const Matrix& delta) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(delta);
  const Vector& ev = solver.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (lo <= 0.0 || hi / lo >= kMaxConditionNumber) {
    throw RankDeficiencyError("plugin_covariance: singular second-moment matrix");
  }
  return solver.eigenvectors() * ev.cwiseInverse().asDiagonal() *
         solver.eigenvectors().transpose();
}

// sigma_hat for row x_i with moments taken over the rows of `pool`.
Matrix plugin_sigma(const Vector& xi, const Matrix& pool, const Matrix& delta_inv) {
  const Vector q = (pool * xi).cwiseMax(0.0).cwiseMin(1.0);
  const Vector w = q.array() * (1.0 - q.array());
  const Matrix inner =
      pool.transpose() * w.asDiagonal() * pool / static_cast<double>(pool.rows());
  Matrix sigma = delta_inv * inner * delta_inv;
  return (sigma + sigma.transpose()) / 2.0;
}

}  // namespace

Matrix second_moment(const Embedding& e) {
  if (e.points.rows() < 1) throw ParameterError("second_moment: empty embedding");
  return symmetrized_second_moment(e.points);
}

CovarianceEstimate plugin_covariance(const Embedding& e, int row) {
  if (row < 0 || row >= e.points.rows()) {
    throw ParameterError("plugin_covariance: row index out of range");
  }
  CovarianceEstimate out;
  out.delta_hat = second_moment(e);
  out.row_index = row;
  const Matrix delta_inv = invert_delta(out.delta_hat);
  out.sigma_hat = plugin_sigma(e.points.row(row).transpose(), e.points, delta_inv);
  return out;
}

CovarianceEstimate pooled_plugin_covariance(const Embedding& first, const Embedding& second,
                                            int row) {
  if (first.points.cols() != second.points.cols()) {
    throw DimensionError("pooled_plugin_covariance: dimension mismatch");
  }
  if (row < 0 || row >= first.points.rows()) {
    throw ParameterError("pooled_plugin_covariance: row index out of range");
  }
  Matrix pool(first.points.rows() + second.points.rows(), first.points.cols());
  pool.topRows(first.points.rows()) = first.points;
  pool.bottomRows(second.points.rows()) = second.points;
  CovarianceEstimate out;
  out.delta_hat = symmetrized_second_moment(pool);
  out.row_index = row;
  const Matrix delta_inv = invert_delta(out.delta_hat);
  out.sigma_hat = plugin_sigma(first.points.row(row).transpose(), pool, delta_inv);
  return out;
}

namespace detail {

Matrix covariance_sqrt(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

Vector gaussian_draw(const Matrix& cov_sqrt, double scale, RandomStream& rng) {
  const int d = static_cast<int>(cov_sqrt.rows());
  Vector z(d);
  for (int k = 0; k < d; ++k) z[k] = rng.next_normal();
  return std::sqrt(scale) * (cov_sqrt * z);
}

}  // namespace detail

std::pair<Embedding, Embedding> case_correct(const Embedding& a, const Embedding& b,
                                             RandomStream rng, bool pooled) {
  if (a.points.cols() != b.points.cols()) {
    throw DimensionError("case_correct: dimension mismatch");
  }
  if (a.corrected || b.corrected) {
    throw ParameterError("case_correct: embeddings are already corrected");
  }
  Embedding first = a;
  Embedding second = b;
  first.corrected = true;
  second.corrected = true;
  if (a.source_order == b.source_order) {
    return {std::move(first), std::move(second)};  // equal orders need no noise
  }

  Embedding& large = (a.source_order > b.source_order) ? first : second;
  const Embedding& large_in = (a.source_order > b.source_order) ? a : b;
  const Embedding& small_in = (a.source_order > b.source_order) ? b : a;
  const double n = static_cast<double>(large_in.source_order);
  const double m = static_cast<double>(small_in.source_order);
  const double scale = 1.0 / m - 1.0 / n;

  Matrix pool;
  if (pooled) {
    pool.resize(large_in.points.rows() + small_in.points.rows(), large_in.points.cols());
    pool.topRows(large_in.points.rows()) = large_in.points;
    pool.bottomRows(small_in.points.rows()) = small_in.points;
  } else {
    pool = large_in.points;
  }
  const Matrix delta_inv = invert_delta(symmetrized_second_moment(pool));

  const long rows = large_in.points.rows();
  for (long i = 0; i < rows; ++i) {
    const Matrix sigma = plugin_sigma(large_in.points.row(i).transpose(), pool, delta_inv);
    RandomStream row_rng = rng.child(static_cast<std::uint64_t>(i));
    const Vector eps = detail::gaussian_draw(detail::covariance_sqrt(sigma), scale, row_rng);
    large.points.row(i) += eps.transpose();
  }
  return {std::move(first), std::move(second)};
}

}  // namespace casetest
