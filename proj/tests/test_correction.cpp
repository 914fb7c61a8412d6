#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "casetest/correction.hpp"
#include "casetest/errors.hpp"

using namespace casetest;

namespace {

Embedding make_embedding(Matrix points, int source_order) {
  Embedding e;
  e.eigenvalues = Vector::Ones(points.cols());
  e.points = std::move(points);
  e.source_order = source_order;
  e.corrected = false;
  return e;
}

Embedding constant_embedding(double value, int n) {
  return make_embedding(Matrix::Constant(n, 1, value), n);
}

Matrix random_points(int n, int d, std::uint64_t seed, double lo = 0.1, double hi = 0.65) {
  RandomStream rng(seed);
  Matrix pts(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) pts(i, j) = (lo + (hi - lo) * rng.next_unit()) / std::sqrt(d);
  }
  return pts;
}

// independent oracle: literal triple loop over the estimator definition
Matrix naive_plugin(const Matrix& pts, const Matrix& pool, int i) {
  const long n = pool.rows();
  const long d = pool.cols();
  Matrix delta = Matrix::Zero(d, d);
  for (long j = 0; j < n; ++j) {
    for (long r = 0; r < d; ++r) {
      for (long c = 0; c < d; ++c) delta(r, c) += pool(j, r) * pool(j, c);
    }
  }
  delta /= static_cast<double>(n);
  Matrix inner = Matrix::Zero(d, d);
  for (long j = 0; j < n; ++j) {
    double q = 0.0;
    for (long c = 0; c < d; ++c) q += pts(i, c) * pool(j, c);
    q = std::clamp(q, 0.0, 1.0);
    const double w = q * (1.0 - q);
    for (long r = 0; r < d; ++r) {
      for (long c = 0; c < d; ++c) inner(r, c) += w * pool(j, r) * pool(j, c);
    }
  }
  inner /= static_cast<double>(n);
  const Matrix delta_inv = delta.inverse();
  return delta_inv * inner * delta_inv;
}

Embedding embed_er(int n, double p, std::uint64_t seed) {
  const auto lat = sample_latents(er_model(p), n, RandomStream(seed));
  const auto adj = sample_adjacency(lat, RandomStream(seed + 1));
  return align_signs(ase(adj, 1));
}

// two-sample Kolmogorov-Smirnov rejection at level 0.05
bool ks_rejects(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  double d_stat = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) {
      ++i;
    } else {
      ++j;
    }
    d_stat = std::max(d_stat, std::abs(i / n - j / m));
  }
  return d_stat > 1.358 * std::sqrt((n + m) / (n * m));
}

}  // namespace

TEST_CASE("second moment of constant and orthonormal rows") {
  CHECK(second_moment(constant_embedding(0.8, 5))(0, 0) == doctest::Approx(0.64).epsilon(1e-14));

  Matrix eye(2, 2);
  eye << 1, 0, 0, 1;
  const Matrix m = second_moment(make_embedding(eye, 2));
  CHECK(m(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m(0, 1) == 0.0);
}

TEST_CASE("second moment matches a brute-force double loop") {
  const Matrix pts = random_points(10, 2, 3);
  const Matrix m = second_moment(make_embedding(pts, 10));
  Matrix oracle = Matrix::Zero(2, 2);
  for (int j = 0; j < 10; ++j) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) oracle(r, c) += pts(j, r) * pts(j, c);
    }
  }
  oracle /= 10.0;
  CHECK((m - oracle).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("plugin covariance of a constant embedding evaluates in closed form") {
  // delta = p^2, inner = (p^2 - p^4) p^2, sigma = 1 - p^2 = 0.36
  const auto est = plugin_covariance(constant_embedding(0.8, 50), 7);
  CHECK(est.row_index == 7);
  CHECK(est.delta_hat(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(est.sigma_hat(0, 0) == doctest::Approx(0.36).epsilon(1e-12));
}

TEST_CASE("plugin covariance matches the naive triple-loop oracle") {
  RandomStream seeds(91);
  for (int t = 0; t < 30; ++t) {
    const int n = 5 + static_cast<int>(seeds.next_below(40));
    const int d = 1 + static_cast<int>(seeds.next_below(3));
    // upper range above 1/sqrt(d) so that some inner products clamp
    const Matrix pts = random_points(n, d, seeds.next_u64(), 0.1, 1.05);
    const int i = static_cast<int>(seeds.next_below(n));
    const auto est = plugin_covariance(make_embedding(pts, n), i);
    const Matrix oracle = naive_plugin(pts, pts, i);
    CHECK((est.sigma_hat - oracle).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("plugin covariance of an ER embedding approaches 1 - p^2") {
  const Embedding e = embed_er(2000, 0.8, 17);
  const auto est = plugin_covariance(e, 0);
  CHECK(est.sigma_hat(0, 0) == doctest::Approx(0.36).epsilon(0.10));
}

TEST_CASE("plugin covariance is PSD and the variance weights are clamped") {
  const Matrix pts = random_points(40, 2, 5, 0.2, 1.1);
  const auto est = plugin_covariance(make_embedding(pts, 40), 3);
  Eigen::SelfAdjointEigenSolver<Matrix> sig(est.sigma_hat);
  CHECK(sig.eigenvalues().minCoeff() >= -1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> del(est.delta_hat);
  CHECK(del.eigenvalues().minCoeff() > 0.0);
  for (int j = 0; j < 40; ++j) {
    const double q = std::clamp(pts.row(3).dot(pts.row(j)), 0.0, 1.0);
    const double w = q * (1.0 - q);
    CHECK(w >= 0.0);
    CHECK(w <= 0.25);
  }
}

TEST_CASE("plugin covariance rejects a rank-deficient second moment") {
  Matrix degenerate(6, 2);
  for (int i = 0; i < 6; ++i) {
    degenerate(i, 0) = 0.5;
    degenerate(i, 1) = 0.5;  // rows collinear, delta singular
  }
  CHECK_THROWS_AS(plugin_covariance(make_embedding(degenerate, 6), 0), RankDeficiencyError);
}

TEST_CASE("pooled covariance reduces to the plain one on duplicated embeddings") {
  const Matrix pts = random_points(20, 2, 7);
  const Embedding e = make_embedding(pts, 20);
  const auto plain = plugin_covariance(e, 4);
  const auto pooled = pooled_plugin_covariance(e, e, 4);
  CHECK((plain.sigma_hat - pooled.sigma_hat).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((plain.delta_hat - pooled.delta_hat).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pooled covariance evaluates in closed form on constant embeddings") {
  const auto same = pooled_plugin_covariance(constant_embedding(0.8, 30),
                                             constant_embedding(0.8, 30), 0);
  CHECK(same.sigma_hat(0, 0) == doctest::Approx(0.36).epsilon(1e-12));

  // rows 0.6 and 0.3 in equal numbers: delta = (0.36 + 0.09) / 2 = 0.225,
  // inner = (0.2304 * 0.36 + 0.1476 * 0.09) / 2, sigma = inner / delta^2 = 0.9504
  const auto mixed = pooled_plugin_covariance(constant_embedding(0.6, 25),
                                              constant_embedding(0.3, 25), 0);
  CHECK(mixed.delta_hat(0, 0) == doctest::Approx(0.225).epsilon(1e-14));
  CHECK(mixed.sigma_hat(0, 0) == doctest::Approx(0.9504).epsilon(1e-12));
}

TEST_CASE("pooled covariance validates dimensions") {
  const Embedding e1 = make_embedding(random_points(10, 2, 1), 10);
  const Embedding e2 = make_embedding(random_points(10, 1, 2), 10);
  CHECK_THROWS_AS(pooled_plugin_covariance(e1, e2, 0), DimensionError);
}

TEST_CASE("equal orders make the correction a no-op on the points") {
  const Embedding a = make_embedding(random_points(15, 2, 11), 15);
  const Embedding b = make_embedding(random_points(15, 2, 12), 15);
  const auto [ca, cb] = case_correct(a, b, RandomStream(3));
  CHECK((ca.points.array() == a.points.array()).all());
  CHECK((cb.points.array() == b.points.array()).all());
  CHECK(ca.corrected);
  CHECK(cb.corrected);
}

TEST_CASE("already corrected embeddings are rejected") {
  Embedding a = make_embedding(random_points(15, 1, 1), 15);
  Embedding b = make_embedding(random_points(10, 1, 2), 10);
  a.corrected = true;
  CHECK_THROWS_AS(case_correct(a, b, RandomStream(1)), ParameterError);
}

TEST_CASE("degenerate covariance adds exactly zero noise") {
  // q = 1 everywhere, so q (1 - q) = 0 and sigma_hat = 0
  const Embedding big = constant_embedding(1.0, 20);
  const Embedding small = constant_embedding(1.0, 10);
  const auto [ca, cb] = case_correct(big, small, RandomStream(9));
  CHECK((ca.points.array() == big.points.array()).all());
  CHECK((cb.points.array() == small.points.array()).all());
}

TEST_CASE("only the larger embedding is perturbed, whichever argument it is") {
  const Embedding big = make_embedding(random_points(30, 1, 21), 30);
  const Embedding small = make_embedding(random_points(12, 1, 22), 12);
  const auto [ca, cb] = case_correct(big, small, RandomStream(5));
  CHECK_FALSE((ca.points.array() == big.points.array()).all());
  CHECK((cb.points.array() == small.points.array()).all());

  const auto [da, db] = case_correct(small, big, RandomStream(5));
  CHECK((da.points.array() == small.points.array()).all());
  CHECK_FALSE((db.points.array() == big.points.array()).all());
}

TEST_CASE("corrected ER embedding variance matches the smaller graph scale") {
  const Embedding big = embed_er(500, 0.8, 31);
  const Embedding small = embed_er(50, 0.8, 41);
  const auto [ca, cb] = case_correct(big, small, RandomStream(51));
  const double mean = ca.points.col(0).mean();
  const double var = (ca.points.col(0).array() - mean).square().sum() / (500 - 1);
  const double target = 0.36 / 50;  // 7.2e-3
  CHECK(var >= 0.75 * target);
  CHECK(var <= 1.25 * target);
}

TEST_CASE("noise scale grows with the larger order") {
  double prev = 0.0;
  for (int n : {60, 100, 400, 2000}) {
    const double scale = 1.0 / 50 - 1.0 / n;
    CHECK(scale > prev);
    prev = scale;
  }
}

TEST_CASE("correction noise has zero mean across seeds") {
  const Embedding big = make_embedding(random_points(20, 2, 61), 20);
  const Embedding small = make_embedding(random_points(10, 2, 62), 10);
  Matrix sum = Matrix::Zero(20, 2);
  Matrix sumsq = Matrix::Zero(20, 2);
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const auto [ca, cb] = case_correct(big, small, RandomStream(1000 + s));
    const Matrix delta = ca.points - big.points;
    sum += delta;
    sumsq += delta.cwiseProduct(delta);
  }
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double mean = sum(i, j) / seeds;
      const double var = sumsq(i, j) / seeds - mean * mean;
      const double se = std::sqrt(var / seeds);
      CHECK(std::abs(mean) <= 4.0 * se);
    }
  }
}

TEST_CASE("gaussian sampler reproduces a fixed covariance") {
  Matrix cov(2, 2);
  cov << 0.04, 0.01, 0.01, 0.09;
  const double scale = 1.0 / 50 - 1.0 / 500;
  const Matrix root = detail::covariance_sqrt(cov);
  RandomStream rng(77);
  Matrix acc = Matrix::Zero(2, 2);
  const int draws = 100000;
  for (int s = 0; s < draws; ++s) {
    const Vector eps = detail::gaussian_draw(root, scale, rng);
    acc += eps * eps.transpose();
  }
  acc /= static_cast<double>(draws);
  const Matrix target = scale * cov;
  CHECK((acc - target).norm() <= 0.02 * target.norm());
}

TEST_CASE("covariance sqrt floors negative eigenvalues") {
  Matrix tiny_negative(2, 2);
  tiny_negative << 1e-18, 0.0, 0.0, -1e-18;
  const Matrix root = detail::covariance_sqrt(tiny_negative);
  CHECK(root.allFinite());
  CHECK(root(1, 1) == 0.0);
}

TEST_CASE("corrected large-graph rows match the small-graph law (KS across seeds)") {
  const int seeds = 200;
  int rejects = 0;
  for (int s = 0; s < seeds; ++s) {
    const Embedding big = embed_er(500, 0.8, 9000 + 3 * s);
    const Embedding small = embed_er(50, 0.8, 90000 + 3 * s);
    const auto [ca, cb] = case_correct(big, small, RandomStream(990000 + s));
    std::vector<double> x(ca.points.col(0).data(), ca.points.col(0).data() + 500);
    std::vector<double> y(cb.points.col(0).data(), cb.points.col(0).data() + 50);
    rejects += ks_rejects(std::move(x), std::move(y));
  }
  CHECK(static_cast<double>(rejects) / seeds <= 0.075);
}
