#pragma once

#include <utility>
#include <vector>

#include "casetest/graph_models.hpp"

namespace casetest {

/// Spectral embedding of a graph: rows estimate latent positions.
struct Embedding {
  Matrix points;       // n x d
  Vector eigenvalues;  // length d, signed, ordered by decreasing magnitude
  bool corrected = false;
  int source_order = 0;  // order of the graph the embedding came from
};

/// Adjacency spectral embedding U |Lambda|^{1/2} from the top-d eigenpairs
/// by magnitude. Throws DimensionError when d > n and RankDeficiencyError
/// when fewer than d numerically nonzero eigenvalues exist.
Embedding ase(const AdjacencyMatrix& a, int d);

/// Negates every column whose median is strictly negative. Idempotent;
/// preserves row norms.
Embedding align_signs(const Embedding& e);

/// Whole-embedding variant: flips all signs of the second embedding when the
/// per-column median sign patterns of the two embeddings disagree and a
/// global flip reconciles them. The per-column align_signs is the default
/// used by the pipelines; this exists for quadrant-matching workflows.
std::pair<Embedding, Embedding> align_embedding_pair(Embedding first, Embedding second);

/// Lower-midpoint median: element at index floor((n-1)/2) of the sorted
/// values. Deterministic order statistic shared by sign alignment and the
/// bandwidth median heuristic.
double lower_median(std::vector<double> values);

namespace detail {

/// Reference path: full symmetric eigendecomposition, then top-d selection.
Embedding ase_dense(const AdjacencyMatrix& a, int d);

/// Lanczos with full reorthogonalization and deflated restarts; used for
/// large graphs with small d. Agrees with ase_dense within solver tolerance.
Embedding ase_lanczos(const AdjacencyMatrix& a, int d);

}  // namespace detail

}  // namespace casetest
