#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "casetest/errors.hpp"
#include "casetest/spectral.hpp"

using namespace casetest;

namespace {

AdjacencyMatrix complete_graph(int n) {
  AdjacencyMatrix a;
  a.entries = Matrix::Ones(n, n) - Matrix::Identity(n, n);
  return a;
}

AdjacencyMatrix random_graph(int n, double p, std::uint64_t seed) {
  const auto lat = sample_latents(er_model(std::sqrt(p)), n, RandomStream(seed));
  return sample_adjacency(lat, RandomStream(seed + 1));
}

// independent median: full sort, element at floor((n-1)/2)
double median_oracle(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

TEST_CASE("lower_median matches a full-sort oracle including even lengths") {
  CHECK(lower_median({2.0}) == 2.0);
  CHECK(lower_median({2.0, 1.0}) == 1.0);
  CHECK(lower_median({1.0, 1.0, 2.0}) == 1.0);
  CHECK(lower_median({0.0, 1.0, 2.0, 3.0}) == 1.0);
  RandomStream rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng.next_below(40));
    for (double& x : v) x = rng.next_normal();
    CHECK(lower_median(v) == median_oracle(v));
  }
  CHECK_THROWS_AS(lower_median({}), ParameterError);
}

TEST_CASE("complete graph on three vertices embeds at sqrt(2/3)") {
  const Embedding e = ase(complete_graph(3), 1);
  REQUIRE(e.points.rows() == 3);
  REQUIRE(e.eigenvalues.size() == 1);
  CHECK(e.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(e.corrected);
  CHECK(e.source_order == 3);
  const double expected = std::sqrt(2.0 / 3.0);  // sqrt(|2|) / sqrt(3)
  const Embedding aligned = align_signs(e);
  for (int i = 0; i < 3; ++i) {
    CHECK(aligned.points(i, 0) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("eigenpair reconstruction holds for retained pairs") {
  const auto a = random_graph(300, 0.64, 42);
  const Embedding e = ase(a, 2);
  for (int k = 0; k < 2; ++k) {
    const Vector u = e.points.col(k) / std::sqrt(std::abs(e.eigenvalues[k]));
    const double resid = (a.entries * u - e.eigenvalues[k] * u).cwiseAbs().maxCoeff();
    CHECK(resid <= 1e-8 * 300);
  }
}

TEST_CASE("full-spectrum embedding reconstructs the adjacency matrix") {
  const int n = 12;
  const AdjacencyMatrix a = random_graph(n, 0.5, 7);
  Eigen::SelfAdjointEigenSolver<Matrix> full(a.entries);
  REQUIRE(full.eigenvalues().cwiseAbs().minCoeff() > 1e-6);

  const Embedding e = ase(a, n);
  Matrix d = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) d(k, k) = e.eigenvalues[k] >= 0.0 ? 1.0 : -1.0;
  const Matrix rec = e.points * d * e.points.transpose();
  CHECK((rec - a.entries).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("dimension and rank errors") {
  const auto a = complete_graph(5);
  CHECK_THROWS_AS(ase(a, 6), DimensionError);
  CHECK_THROWS_AS(ase(a, 0), ParameterError);

  AdjacencyMatrix empty;
  empty.entries = Matrix::Zero(8, 8);
  CHECK_THROWS_AS(ase(empty, 1), RankDeficiencyError);
}

TEST_CASE("eigenvalue ordering prefers positive sign on magnitude ties") {
  // complete bipartite K_{2,2}: eigenvalues {2, -2, 0, 0}
  AdjacencyMatrix a;
  a.entries = Matrix::Zero(4, 4);
  for (int i : {0, 1}) {
    for (int j : {2, 3}) {
      a.entries(i, j) = 1.0;
      a.entries(j, i) = 1.0;
    }
  }
  const Embedding e = ase(a, 2);
  CHECK(e.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(e.eigenvalues[1] == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("per-eigenvector sign convention puts the largest entry positive") {
  const auto a = random_graph(60, 0.4, 11);
  const Embedding e = ase(a, 3);
  for (int k = 0; k < 3; ++k) {
    Eigen::Index idx = 0;
    e.points.col(k).cwiseAbs().maxCoeff(&idx);
    CHECK(e.points(idx, k) > 0.0);
  }
}

TEST_CASE("align_signs flips negative-median columns only") {
  Embedding e;
  e.points = Matrix(3, 1);
  e.points << -0.8, -0.7, -0.75;
  e.eigenvalues = Vector::Ones(1);
  const Embedding flipped = align_signs(e);
  CHECK(flipped.points(0, 0) == 0.8);
  CHECK(flipped.points(1, 0) == 0.7);
  CHECK(flipped.points(2, 0) == 0.75);

  Embedding pos;
  pos.points = Matrix(3, 2);
  pos.points << 0.1, 0.4, 0.2, 0.5, 0.3, 0.6;
  pos.eigenvalues = Vector::Ones(2);
  const Embedding same = align_signs(pos);
  CHECK((same.points.array() == pos.points.array()).all());
}

TEST_CASE("align_signs two-column case against the median oracle") {
  Embedding e;
  e.points = Matrix(5, 2);
  e.points << -0.5, 0.4, 0.2, -0.1, -0.1, 0.2, -0.3, 0.9, 0.4, -0.2;
  e.eigenvalues = Vector::Ones(2);
  std::vector<double> col0(e.points.col(0).data(), e.points.col(0).data() + 5);
  std::vector<double> col1(e.points.col(1).data(), e.points.col(1).data() + 5);
  REQUIRE(median_oracle(col0) < 0.0);
  REQUIRE(median_oracle(col1) > 0.0);
  const Embedding aligned = align_signs(e);
  CHECK((aligned.points.col(0).array() == (-e.points.col(0)).array()).all());
  CHECK((aligned.points.col(1).array() == e.points.col(1).array()).all());
}

TEST_CASE("align_signs is idempotent and preserves row norms") {
  const auto a = random_graph(80, 0.5, 23);
  const Embedding e = ase(a, 2);
  const Embedding once = align_signs(e);
  const Embedding twice = align_signs(once);
  CHECK((once.points.array() == twice.points.array()).all());
  for (int i = 0; i < 80; ++i) {
    CHECK(once.points.row(i).norm() == doctest::Approx(e.points.row(i).norm()).epsilon(1e-15));
  }
  for (int j = 0; j < once.points.cols(); ++j) {
    std::vector<double> col(once.points.col(j).data(), once.points.col(j).data() + 80);
    CHECK(median_oracle(col) >= 0.0);
  }
}

TEST_CASE("align_embedding_pair flips the whole second embedding on quadrant mismatch") {
  Embedding a;
  a.points = Matrix(3, 2);
  a.points << 0.5, 0.4, 0.6, 0.5, 0.7, 0.6;
  a.eigenvalues = Vector::Ones(2);
  Embedding b = a;
  b.points = -b.points;
  const auto [fa, fb] = align_embedding_pair(a, b);
  CHECK((fa.points.array() == a.points.array()).all());
  CHECK((fb.points.array() == a.points.array()).all());

  const auto [ga, gb] = align_embedding_pair(a, a);
  CHECK((gb.points.array() == a.points.array()).all());
}

TEST_CASE("gram consistency: truncation error equals the tail eigenvalue norm") {
  const int n = 30, d = 5;
  const auto a = random_graph(n, 0.5, 31);
  const Embedding e = ase(a, d);
  Matrix sign = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) sign(k, k) = e.eigenvalues[k] >= 0.0 ? 1.0 : -1.0;
  const double err = (a.entries - e.points * sign * e.points.transpose()).norm();

  Eigen::SelfAdjointEigenSolver<Matrix> full(a.entries);
  std::vector<double> mags(full.eigenvalues().data(), full.eigenvalues().data() + n);
  std::sort(mags.begin(), mags.end(),
            [](double x, double y) { return std::abs(x) > std::abs(y); });
  double tail = 0.0;
  for (int k = d; k < n; ++k) tail += mags[k] * mags[k];
  CHECK(err == doctest::Approx(std::sqrt(tail)).epsilon(1e-6));
}

TEST_CASE("embedding columns are orthogonal") {
  const auto a = random_graph(100, 0.6, 37);
  const Embedding e = ase(a, 3);
  const Matrix gram = e.points.transpose() * e.points;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(std::abs(gram(i, j)) < 1e-8);
    }
  }
}

TEST_CASE("iterative and dense solvers agree on ER and SBM graphs") {
  const auto er = random_graph(900, 0.64, 41);
  const Embedding lz = detail::ase_lanczos(er, 2);
  const Embedding dn = detail::ase_dense(er, 2);
  CHECK((lz.eigenvalues - dn.eigenvalues).cwiseAbs().maxCoeff() < 1e-8 * 900);
  CHECK((lz.points - dn.points).cwiseAbs().maxCoeff() < 1e-6);

  Matrix z(3, 3);
  z << 0.839, 0.326, 0.045, 0.757, 0.486, 0.090, 0.646, 0.627, 0.000;
  Vector pi(3);
  pi << 0.4, 0.3, 0.3;
  const auto lat = sample_latents(LatentDistribution::mixture(pi, z), 1000, RandomStream(43));
  const auto sbm = sample_adjacency(lat, RandomStream(44));
  const Embedding lz3 = detail::ase_lanczos(sbm, 3);
  const Embedding dn3 = detail::ase_dense(sbm, 3);
  CHECK((lz3.eigenvalues - dn3.eigenvalues).cwiseAbs().maxCoeff() < 1e-8 * 1000);
  CHECK((lz3.points - dn3.points).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ase is statistically consistent for point-mass graphs") {
  const int seeds = 100;
  int good = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto lat = sample_latents(er_model(0.8), 1000, RandomStream(1000 + s));
    const auto adj = sample_adjacency(lat, RandomStream(2000 + s));
    const Embedding e = align_signs(ase(adj, 1));
    const double worst = (e.points.array() - 0.8).abs().maxCoeff();
    good += worst < 0.1;
  }
  CHECK(good >= 99);
}

TEST_CASE("ER embedding matches the asymptotic mean and variance scale") {
  const int n = 500;
  const auto lat = sample_latents(er_model(0.8), n, RandomStream(55));
  const auto adj = sample_adjacency(lat, RandomStream(56));
  const Embedding e = align_signs(ase(adj, 1));
  const double mean = e.points.col(0).mean();
  CHECK(std::abs(mean - 0.8) <= 4.0 * std::sqrt(0.36 / n) / std::sqrt(static_cast<double>(n)));
  const double var = (e.points.col(0).array() - mean).square().sum() / (n - 1);
  const double target = 0.36 / n;
  CHECK(var >= 0.75 * target);
  CHECK(var <= 1.25 * target);
}
