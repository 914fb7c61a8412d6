#pragma once

#include <utility>

#include "casetest/spectral.hpp"

namespace casetest {

/// Plug-in estimate of the asymptotic row covariance of a spectral embedding.
struct CovarianceEstimate {
  Matrix sigma_hat;  // d x d, symmetric PSD
  Matrix delta_hat;  // d x d empirical second-moment matrix
  int row_index = 0;
};

/// Empirical second-moment matrix (1/n) sum_j x_j x_j^T of the embedding rows.
Matrix second_moment(const Embedding& e);

/// Plug-in row covariance
///   sigma_hat = delta^{-1} [ (1/n) sum_j q_ij (1 - q_ij) x_j x_j^T ] delta^{-1},
/// with q_ij the inner product x_i . x_j clamped to [0, 1]. Throws
/// RankDeficiencyError when delta_hat is numerically singular.
CovarianceEstimate plugin_covariance(const Embedding& e, int row);

/// Same estimator with the empirical moments taken over the concatenated rows
/// of both embeddings; `row` indexes the first embedding.
CovarianceEstimate pooled_plugin_covariance(const Embedding& first, const Embedding& second,
                                            int row);

/// Corrected adjacency spectral embeddings: each row of the larger-order
/// embedding receives Gaussian noise with covariance (1/m - 1/n) sigma_hat,
/// matching the row variability of the smaller graph; the smaller embedding
/// passes through unchanged. Equal orders are a no-op on the points. Both
/// outputs are flagged corrected.
std::pair<Embedding, Embedding> case_correct(const Embedding& a, const Embedding& b,
                                             RandomStream rng, bool pooled = false);

namespace detail {

/// Symmetric square root of a covariance matrix via eigendecomposition,
/// flooring negative eigenvalues at zero.
Matrix covariance_sqrt(const Matrix& cov);

/// Draw from N(0, scale * cov) given the square root of cov.
Vector gaussian_draw(const Matrix& cov_sqrt, double scale, RandomStream& rng);

}  // namespace detail

}  // namespace casetest
