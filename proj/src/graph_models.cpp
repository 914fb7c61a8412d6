#include "casetest/graph_models.hpp"

#include <cmath>
#include <sstream>

#include "casetest/errors.hpp"

namespace casetest {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kInnerProductTol = 1e-9;

void check_pairwise_inner_products(const Matrix& rows, const char* what) {
  const Matrix gram = rows * rows.transpose();
  if (gram.minCoeff() < -kInnerProductTol || gram.maxCoeff() > 1.0 + kInnerProductTol) {
    throw ParameterError(std::string(what) + ": pairwise inner products must lie in [0, 1]");
  }
}

void check_mixture(const Mixture& m) {
  if (m.weights.size() == 0 || m.atoms.rows() != m.weights.size()) {
    throw ParameterError("mixture: weights and atom rows must match and be nonempty");
  }
  if ((m.weights.array() <= 0.0).any()) {
    throw ParameterError("mixture: weights must be strictly positive");
  }
  if (std::abs(m.weights.sum() - 1.0) > kWeightSumTol) {
    throw ParameterError("mixture: weights must sum to 1");
  }
  check_pairwise_inner_products(m.atoms, "mixture");
}

int sample_category(const Vector& weights, RandomStream& rng) {
  const double u = rng.next_unit();
  double acc = 0.0;
  const int k = static_cast<int>(weights.size());
  for (int i = 0; i < k; ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return k - 1;
}

}  // namespace

LatentDistribution::LatentDistribution(Value v) : value_(std::move(v)) {
  dimension_ = std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointMass>) return static_cast<int>(d.point.size());
        if constexpr (std::is_same_v<T, Mixture>) return static_cast<int>(d.atoms.cols());
        if constexpr (std::is_same_v<T, DegreeCorrected>)
          return static_cast<int>(d.base.atoms.cols());
        if constexpr (std::is_same_v<T, SimplexMixture>)
          return static_cast<int>(d.vertices.cols());
        if constexpr (std::is_same_v<T, AffineBeta>) return 1;
      },
      value_);
}

LatentDistribution LatentDistribution::point_mass(Vector point) {
  if (point.size() == 0) throw ParameterError("point_mass: empty point");
  check_pairwise_inner_products(point.transpose(), "point_mass");
  return LatentDistribution(PointMass{std::move(point)});
}

LatentDistribution LatentDistribution::mixture(Vector weights, Matrix atoms) {
  Mixture m{std::move(weights), std::move(atoms)};
  check_mixture(m);
  return LatentDistribution(std::move(m));
}

LatentDistribution LatentDistribution::degree_corrected(Vector weights, Matrix atoms,
                                                        ScalarLaw law, std::string law_name) {
  Mixture base{std::move(weights), std::move(atoms)};
  check_mixture(base);
  if (!law) throw ParameterError("degree_corrected: missing scalar law");
  return LatentDistribution(DegreeCorrected{std::move(base), std::move(law), std::move(law_name)});
}

LatentDistribution LatentDistribution::simplex_mixture(Matrix vertices, SimplexLaw law,
                                                       std::string law_name) {
  if (vertices.rows() == 0) throw ParameterError("simplex_mixture: no vertices");
  // Inner products of convex combinations stay within the range spanned by
  // the pairwise vertex products, so checking vertices suffices.
  check_pairwise_inner_products(vertices, "simplex_mixture");
  if (!law) throw ParameterError("simplex_mixture: missing simplex law");
  return LatentDistribution(SimplexMixture{std::move(vertices), std::move(law), std::move(law_name)});
}

LatentDistribution LatentDistribution::affine_beta(double scale, double shape, double offset) {
  if (!(shape > 0.0)) throw ParameterError("affine_beta: shape must be positive");
  if (scale < 0.0 || offset < 0.0) {
    throw ParameterError("affine_beta: support must be nonnegative");
  }
  const double hi = scale + offset;
  if (hi * hi > 1.0 + kInnerProductTol) {
    throw ParameterError("affine_beta: support endpoint exceeds the unit inner-product bound");
  }
  return LatentDistribution(AffineBeta{scale, shape, offset, false});
}

LatentDistribution LatentDistribution::affine_bernoulli(double scale, double offset) {
  if (scale < 0.0 || offset < 0.0) {
    throw ParameterError("affine_bernoulli: support must be nonnegative");
  }
  const double hi = scale + offset;
  if (hi * hi > 1.0 + kInnerProductTol) {
    throw ParameterError("affine_bernoulli: support endpoint exceeds the unit inner-product bound");
  }
  return LatentDistribution(AffineBeta{scale, 0.0, offset, true});
}

bool LatentDistribution::has_block_labels() const {
  return std::holds_alternative<Mixture>(value_) || std::holds_alternative<DegreeCorrected>(value_);
}

std::string LatentDistribution::describe() const {
  std::ostringstream out;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          if (d.point.size() == 1) {
            out << "er(" << d.point[0] << ")";
          } else {
            out << "pointmass(d=" << d.point.size() << ")";
          }
        } else if constexpr (std::is_same_v<T, Mixture>) {
          out << "mixture(K=" << d.weights.size() << ",d=" << d.atoms.cols() << ")";
        } else if constexpr (std::is_same_v<T, DegreeCorrected>) {
          out << "degree_corrected(K=" << d.base.weights.size() << ",law=" << d.law_name << ")";
        } else if constexpr (std::is_same_v<T, SimplexMixture>) {
          out << "simplex_mixture(K=" << d.vertices.rows() << ",law=" << d.law_name << ")";
        } else if constexpr (std::is_same_v<T, AffineBeta>) {
          if (d.bernoulli_limit) {
            out << "affine_bernoulli(" << d.scale << "," << d.offset << ")";
          } else {
            out << "affine_beta(" << d.scale << "," << d.shape << "," << d.offset << ")";
          }
        }
      },
      value_);
  return out.str();
}

LatentDistribution er_model(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("er_model: p must lie in [0, 1]");
  Vector v(1);
  v[0] = p;
  return LatentDistribution::point_mass(std::move(v));
}

ScalarLaw scalar_point_mass_law(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw ParameterError("scalar point-mass law: value outside [0, 1]");
  return [c](RandomStream&, int) { return c; };
}

ScalarLaw scalar_uniform_law() {
  return [](RandomStream& rng, int) { return rng.next_unit(); };
}

SimplexLaw simplex_point_mass_law(Vector weights) {
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > kWeightSumTol) {
    throw ParameterError("simplex point-mass law: weights must be a probability vector");
  }
  return [w = std::move(weights)](RandomStream&) { return w; };
}

SimplexLaw simplex_dirichlet_law(int k, double alpha) {
  if (k < 1 || !(alpha > 0.0)) throw ParameterError("dirichlet law: need k >= 1 and alpha > 0");
  return [k, alpha](RandomStream& rng) {
    Vector v(k);
    for (int i = 0; i < k; ++i) v[i] = rng.next_gamma(alpha);
    const double s = v.sum();
    if (s <= 0.0) {
      v.setConstant(1.0 / k);
      return v;
    }
    v /= s;
    return v;
  };
}

LatentPositions sample_latents(const LatentDistribution& dist, int n, RandomStream rng) {
  if (n < 1) throw ParameterError("sample_latents: n must be >= 1");
  LatentPositions out;
  out.points.resize(n, dist.dimension());
  if (dist.has_block_labels()) out.labels.resize(n);

  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          for (int i = 0; i < n; ++i) out.points.row(i) = d.point.transpose();
        } else if constexpr (std::is_same_v<T, Mixture>) {
          for (int i = 0; i < n; ++i) {
            const int b = sample_category(d.weights, rng);
            out.labels[i] = b;
            out.points.row(i) = d.atoms.row(b);
          }
        } else if constexpr (std::is_same_v<T, DegreeCorrected>) {
          for (int i = 0; i < n; ++i) {
            const int b = sample_category(d.base.weights, rng);
            const double c = d.law(rng, b);
            if (!(c >= 0.0 && c <= 1.0)) {
              throw ParameterError("degree_corrected: scalar law produced a value outside [0, 1]");
            }
            out.labels[i] = b;
            out.points.row(i) = c * d.base.atoms.row(b);
          }
        } else if constexpr (std::is_same_v<T, SimplexMixture>) {
          const int k = static_cast<int>(d.vertices.rows());
          for (int i = 0; i < n; ++i) {
            const Vector w = d.law(rng);
            if (w.size() != k || (w.array() < -kWeightSumTol).any() ||
                std::abs(w.sum() - 1.0) > 1e-9) {
              throw ParameterError("simplex_mixture: law produced an invalid weight vector");
            }
            out.points.row(i) = w.transpose() * d.vertices;
          }
        } else if constexpr (std::is_same_v<T, AffineBeta>) {
          for (int i = 0; i < n; ++i) {
            const double b =
                d.bernoulli_limit ? (rng.next_bernoulli(0.5) ? 1.0 : 0.0) : rng.next_beta(d.shape, d.shape);
            out.points(i, 0) = d.scale * b + d.offset;
          }
        }
      },
      dist.value());
  return out;
}

AdjacencyMatrix sample_adjacency(const LatentPositions& latents, RandomStream rng) {
  const int n = static_cast<int>(latents.points.rows());
  if (n < 1) throw ParameterError("sample_adjacency: empty latent positions");
  AdjacencyMatrix a;
  a.entries = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto xi = latents.points.row(i);
    for (int j = i + 1; j < n; ++j) {
      double q = xi.dot(latents.points.row(j));
      if (q < -kInnerProductTol || q > 1.0 + kInnerProductTol) {
        throw ModelViolationError("sample_adjacency: inner product outside [0, 1] at rows " +
                                  std::to_string(i) + "," + std::to_string(j));
      }
      q = std::min(1.0, std::max(0.0, q));
      const double e = rng.next_bernoulli(q) ? 1.0 : 0.0;
      a.entries(i, j) = e;
      a.entries(j, i) = e;
    }
  }
  return a;
}

}  // namespace casetest
