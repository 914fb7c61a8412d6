#include "casetest/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "casetest/errors.hpp"

namespace casetest {

namespace {

// Graphs at or below this order always use the dense reference solver.
constexpr int kDenseCutoff = 800;
// The iterative path only pays off for a thin slice of the spectrum.
constexpr int kLanczosMaxDim = 24;

struct Candidate {
  double lambda = 0.0;
  Vector vec;
  int max_entry_index = 0;
};

// Largest-|entry| coefficient made positive; removes solver-dependent sign noise.
void canonicalize_sign(Candidate& c) {
  Eigen::Index idx = 0;
  c.vec.cwiseAbs().maxCoeff(&idx);
  c.max_entry_index = static_cast<int>(idx);
  if (c.vec[idx] < 0.0) c.vec = -c.vec;
}

// Decreasing |lambda|; magnitudes within solver noise count as tied, and
// ties prefer the positive eigenvalue, then the vector whose
// largest-magnitude entry sits at the smaller index.
bool candidate_before(const Candidate& a, const Candidate& b) {
  const double ma = std::abs(a.lambda), mb = std::abs(b.lambda);
  const double tie_tol = 1e-12 * std::max({1.0, ma, mb});
  if (std::abs(ma - mb) > tie_tol) return ma > mb;
  if ((a.lambda > 0.0) != (b.lambda > 0.0)) return a.lambda > 0.0;
  return a.max_entry_index < b.max_entry_index;
}

Embedding assemble(std::vector<Candidate> candidates, int d, int n) {
  std::sort(candidates.begin(), candidates.end(), candidate_before);
  if (static_cast<int>(candidates.size()) < d) {
    throw RankDeficiencyError("ase: fewer than d eigenpairs available");
  }
  const double max_abs = candidates.empty() ? 0.0 : std::abs(candidates.front().lambda);
  const double zero_tol = 1e-9 * std::max(1.0, max_abs);
  if (std::abs(candidates[d - 1].lambda) <= zero_tol) {
    throw RankDeficiencyError("ase: fewer than d nonzero eigenvalues");
  }
  Embedding e;
  e.points.resize(n, d);
  e.eigenvalues.resize(d);
  for (int k = 0; k < d; ++k) {
    e.eigenvalues[k] = candidates[k].lambda;
    e.points.col(k) = candidates[k].vec * std::sqrt(std::abs(candidates[k].lambda));
  }
  e.corrected = false;
  e.source_order = n;
  return e;
}

void check_dims(const AdjacencyMatrix& a, int d) {
  const int n = a.order();
  if (d < 1) throw ParameterError("ase: d must be >= 1");
  if (d > n) throw DimensionError("ase: d exceeds the graph order");
}

// Deterministic pseudo-random start vectors for the iterative solver.
Vector lanczos_start(int n, int restart) {
  RandomStream rng(0x5ca1ab1e00000000ull + static_cast<std::uint64_t>(restart));
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_unit() - 0.5;
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

void orthogonalize_against(const std::vector<Vector>& basis, Vector& w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& q : basis) w -= q.dot(w) * q;
  }
}

}  // namespace

double lower_median(std::vector<double> values) {
  if (values.empty()) throw ParameterError("lower_median: empty input");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

namespace detail {

Embedding ase_dense(const AdjacencyMatrix& a, int d) {
  check_dims(a, d);
  const int n = a.order();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.entries);
  if (solver.info() != Eigen::Success) {
    throw RankDeficiencyError("ase: eigendecomposition failed");
  }
  std::vector<Candidate> candidates(n);
  for (int i = 0; i < n; ++i) {
    candidates[i].lambda = solver.eigenvalues()[i];
    candidates[i].vec = solver.eigenvectors().col(i);
    canonicalize_sign(candidates[i]);
  }
  return assemble(std::move(candidates), d, n);
}

Embedding ase_lanczos(const AdjacencyMatrix& a, int d) {
  check_dims(a, d);
  const int n = a.order();
  const double frob = a.entries.norm();
  const double breakdown_tol = 1e-12 * std::max(1.0, frob);
  // 2-norm residual target; a factor 10 under the 1e-8*n max-norm contract.
  const double resid_tol = 1e-9 * std::max(1.0, static_cast<double>(n));

  std::vector<Candidate> collected;
  std::vector<Vector> deflation;  // converged eigenvectors, orthonormal

  const int max_restarts = 2 * d + 6;
  for (int restart = 0; restart < max_restarts && static_cast<int>(collected.size()) < d;
       ++restart) {
    Vector v = lanczos_start(n, restart);
    orthogonalize_against(deflation, v);
    if (v.norm() < 1e-8) continue;
    v /= v.norm();

    const int m_max = std::min(n - static_cast<int>(deflation.size()), 450);
    if (m_max < 1) break;
    std::vector<Vector> basis;
    basis.reserve(static_cast<std::size_t>(m_max));
    basis.push_back(v);
    std::vector<double> alpha, beta;  // T diagonal / off-diagonal

    for (int j = 0; j < m_max; ++j) {
      Vector w = a.entries * basis[j];
      const double aj = basis[j].dot(w);
      alpha.push_back(aj);
      w -= aj * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      orthogonalize_against(basis, w);
      orthogonalize_against(deflation, w);
      const double bj = w.norm();

      const bool at_end = (j + 1 == m_max) || bj <= breakdown_tol;
      const bool do_check = at_end || ((j + 1) % 25 == 0 && j + 1 >= d + 2);
      if (do_check) {
        const int m = j + 1;
        Matrix tri = Matrix::Zero(m, m);
        for (int t = 0; t < m; ++t) {
          tri(t, t) = alpha[t];
          if (t + 1 < m) {
            tri(t, t + 1) = beta[t];
            tri(t + 1, t) = beta[t];
          }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> tsolve(tri);
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
          return std::abs(tsolve.eigenvalues()[x]) > std::abs(tsolve.eigenvalues()[y]);
        });
        const int needed = d - static_cast<int>(collected.size());
        const int avail = std::min(needed, m);
        bool all_ready = true;
        if (!(bj <= breakdown_tol)) {
          for (int t = 0; t < avail; ++t) {
            const double bound = bj * std::abs(tsolve.eigenvectors()(m - 1, order[t]));
            if (bound > 0.5 * resid_tol) {
              all_ready = false;
              break;
            }
          }
        }
        if (all_ready || bj <= breakdown_tol) {
          const int take = (bj <= breakdown_tol) ? m : avail;
          std::vector<Candidate> accepted;
          bool all_verified = true;
          for (int t = 0; t < take; ++t) {
            if (static_cast<int>(collected.size() + accepted.size()) >= d) break;
            Vector y = Vector::Zero(n);
            for (int s = 0; s < m; ++s) y += tsolve.eigenvectors()(s, order[t]) * basis[s];
            orthogonalize_against(deflation, y);
            const double ynorm = y.norm();
            if (ynorm < 1e-8) continue;
            y /= ynorm;
            const double theta = y.dot(a.entries * y);
            const double resid = (a.entries * y - theta * y).norm();
            if (resid <= resid_tol) {
              Candidate c;
              c.lambda = theta;
              c.vec = y;
              canonicalize_sign(c);
              accepted.push_back(std::move(c));
            } else {
              all_verified = false;
            }
          }
          // Commit only when this run is over; deflating against vectors from
          // the live Krylov space would corrupt the recurrence.
          if (bj <= breakdown_tol || all_verified) {
            for (Candidate& c : accepted) {
              deflation.push_back(c.vec);
              collected.push_back(std::move(c));
            }
            break;
          }
        }
      }
      if (bj <= breakdown_tol) break;
      beta.push_back(bj);
      basis.push_back(w / bj);
    }
  }

  if (static_cast<int>(collected.size()) < d) {
    if (n <= 4000) return ase_dense(a, d);  // correctness over speed
    throw RankDeficiencyError("ase: iterative eigensolver failed to converge");
  }
  return assemble(std::move(collected), d, n);
}

}  // namespace detail

Embedding ase(const AdjacencyMatrix& a, int d) {
  check_dims(a, d);
  const int n = a.order();
  if (n <= kDenseCutoff || d > kLanczosMaxDim || 8 * d > n) {
    return detail::ase_dense(a, d);
  }
  return detail::ase_lanczos(a, d);
}

Embedding align_signs(const Embedding& e) {
  Embedding out = e;
  const int n = static_cast<int>(out.points.rows());
  for (int j = 0; j < out.points.cols(); ++j) {
    std::vector<double> col(out.points.col(j).data(), out.points.col(j).data() + n);
    if (lower_median(std::move(col)) < 0.0) out.points.col(j) = -out.points.col(j);
  }
  return out;
}

std::pair<Embedding, Embedding> align_embedding_pair(Embedding first, Embedding second) {
  if (first.points.cols() != second.points.cols()) {
    throw DimensionError("align_embedding_pair: dimension mismatch");
  }
  const int d = static_cast<int>(first.points.cols());
  auto median_sign = [](const Embedding& e, int j) {
    std::vector<double> col(e.points.col(j).data(), e.points.col(j).data() + e.points.rows());
    const double m = lower_median(std::move(col));
    return (m > 0.0) - (m < 0.0);
  };
  bool disagree = false, flip_fixes = true;
  for (int j = 0; j < d; ++j) {
    const int sa = median_sign(first, j), sb = median_sign(second, j);
    if (sa * sb < 0) disagree = true;
    if (sa * sb > 0) flip_fixes = false;
  }
  if (disagree && flip_fixes) second.points = -second.points;
  return {std::move(first), std::move(second)};
}

}  // namespace casetest
