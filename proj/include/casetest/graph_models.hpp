#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "casetest/random.hpp"

namespace casetest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Scalar degree-correction law on [0, 1]. Receives the block label of the
/// row being corrected, so joint (label-dependent) laws are expressible.
using ScalarLaw = std::function<double(RandomStream&, int block)>;

/// Law over the (K-1)-simplex; returns a length-K weight vector summing to 1.
using SimplexLaw = std::function<Vector(RandomStream&)>;

struct PointMass {
  Vector point;
};

/// Finite mixture of point masses (latent structure of an SBM).
struct Mixture {
  Vector weights;  // length K, strictly positive, sums to 1
  Matrix atoms;    // K x d, rows are the distinct latent positions
};

/// Mixture scaled row-wise by a random value in [0, 1] (DCSBM latents).
struct DegreeCorrected {
  Mixture base;
  ScalarLaw law;
  std::string law_name;
};

/// Convex combinations of K vertices with simplex-distributed weights
/// (MMSBM latents).
struct SimplexMixture {
  Matrix vertices;  // K x d
  SimplexLaw law;
  std::string law_name;
};

/// One-dimensional family scale * Beta(shape, shape) + offset. The
/// bernoulli_limit flag selects the shape -> 0 limit, scale * Bernoulli(1/2)
/// + offset.
struct AffineBeta {
  double scale = 0.0;
  double shape = 1.0;
  double offset = 0.0;
  bool bernoulli_limit = false;
};

/// Generative description of latent positions; all pairwise inner products
/// over the support must lie in [0, 1].
class LatentDistribution {
 public:
  using Value = std::variant<PointMass, Mixture, DegreeCorrected, SimplexMixture, AffineBeta>;

  static LatentDistribution point_mass(Vector point);
  static LatentDistribution mixture(Vector weights, Matrix atoms);
  static LatentDistribution degree_corrected(Vector weights, Matrix atoms, ScalarLaw law,
                                             std::string law_name);
  static LatentDistribution simplex_mixture(Matrix vertices, SimplexLaw law,
                                            std::string law_name);
  static LatentDistribution affine_beta(double scale, double shape, double offset);
  static LatentDistribution affine_bernoulli(double scale, double offset);

  int dimension() const { return dimension_; }
  const Value& value() const { return value_; }
  bool has_block_labels() const;

  /// Compact display form, e.g. "er(0.8)" or "affine_beta(0.3,0.25,0.3)".
  std::string describe() const;

 private:
  explicit LatentDistribution(Value v);
  Value value_;
  int dimension_ = 0;
};

/// Point mass at p in one dimension; sampling yields ER(n, p^2) graphs.
LatentDistribution er_model(double p);

// Built-in pluggable laws.
ScalarLaw scalar_point_mass_law(double c);
ScalarLaw scalar_uniform_law();
SimplexLaw simplex_point_mass_law(Vector weights);
SimplexLaw simplex_dirichlet_law(int k, double alpha);

struct LatentPositions {
  Matrix points;            // n x d
  std::vector<int> labels;  // per-row block labels; empty when not applicable
};

/// Symmetric hollow binary adjacency matrix; entries stored as 0.0 / 1.0.
struct AdjacencyMatrix {
  Matrix entries;
  int order() const { return static_cast<int>(entries.rows()); }
};

/// n iid rows from dist, sampled row by row in a fixed order.
LatentPositions sample_latents(const LatentDistribution& dist, int n, RandomStream rng);

/// Bernoulli(X_i . X_j) over the upper triangle in row-major order, then
/// symmetrized. Inner products within 1e-9 of [0, 1] are clamped; anything
/// further out raises ModelViolationError.
AdjacencyMatrix sample_adjacency(const LatentPositions& latents, RandomStream rng);

}  // namespace casetest
