#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "casetest/correction.hpp"
#include "casetest/two_sample.hpp"

namespace casetest {

enum class MethodSelection { Ase, Case, Both };

/// Full description of a Monte Carlo experiment; every field has a key in
/// the flat config-file format (see parse_experiment_config).
struct ExperimentConfig {
  std::string name = "er-size";
  LatentDistribution dist_a = er_model(0.8);  // larger graph, order c * m
  LatentDistribution dist_b = er_model(0.8);  // smaller graph, order m
  std::vector<int> c_grid = {1, 2, 5, 7, 10};
  std::vector<int> m_grid = {50, 100, 200, 300};
  int dim = 1;
  MethodSelection method = MethodSelection::Both;
  bool pooled = false;
  KernelConfig kernel = KernelConfig::fixed(0.5);
  int permutations = 200;
  int replicates = 200;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency; never affects the output bytes
  // rdpg-grid only: ordered (small, large) pairs over {fx, fy, fz}.
  std::vector<std::pair<std::string, std::string>> rdpg_pairs = {
      {"fx", "fy"}, {"fx", "fz"}, {"fy", "fx"}, {"fy", "fz"}, {"fz", "fx"}, {"fz", "fy"}};
};

/// One (experiment, c, m, method) cell of an experiment.
struct CellResult {
  std::string experiment;
  int c = 0;
  int m = 0;
  std::string method;  // "ase" or "case"
  double alpha = 0.05;
  int replicates = 0;
  int rejections = 0;
  int failures = 0;
  double rate = 0.0;
  double ci_half = 0.0;  // 1.96 * sqrt(rate (1 - rate) / replicates)
  std::vector<double> p_values;  // by replicate index; NaN for failures
  double seconds = 0.0;
};

struct ExperimentResult {
  std::string name;
  std::vector<CellResult> cells;
};

/// sample -> embed -> align -> (optionally) correct -> permutation test.
/// Substreams are derived from fixed keys of `rng`, so correction on/off
/// with equal orders produces identical results for the same seed.
TestResult run_pipeline_once(const LatentDistribution& dist_a, int n,
                             const LatentDistribution& dist_b, int m, int d, bool use_case,
                             bool pooled, const KernelConfig& kernel, int permutations,
                             RandomStream rng);

/// Pipeline tail for already-loaded graphs: embed, align, optionally
/// correct, then test. Substream keys match run_pipeline_once.
TestResult test_graph_pair(const AdjacencyMatrix& a, const AdjacencyMatrix& b, int d,
                           bool use_case, bool pooled, const KernelConfig& kernel,
                           int permutations, RandomStream rng);

/// Null-hypothesis grid: dist_a = dist_b, tabulates rejection rates per
/// (c, m) cell for the configured methods.
ExperimentResult run_size_experiment(const ExperimentConfig& cfg);

/// Alternative-hypothesis grid; only the corrected embeddings are tested
/// (the uncorrected test is not valid for c > 1).
ExperimentResult run_power_experiment(const ExperimentConfig& cfg);

/// SBM study: dispatches to the size or power driver depending on whether
/// the two block models coincide.
ExperimentResult run_sbm_experiments(const ExperimentConfig& cfg);

/// Power over ordered pairs of the named one-dimensional families fx/fy/fz,
/// small graph of order m versus large graph of order c * m, corrected
/// embeddings only.
ExperimentResult run_rdpg_grid(const ExperimentConfig& cfg);

/// Repeated testing of two fixed graphs: the spectral embeddings and the
/// uncorrected pairwise cache are computed once; every repetition redraws
/// the correction noise and the permutations.
struct RepeatedTestResult {
  std::vector<double> ase_p_values;
  std::vector<double> case_p_values;
  int n = 0;
  int m = 0;
};
RepeatedTestResult run_repeated_real_test(const std::string& path_a, const std::string& path_b,
                                          int d, int repetitions, const KernelConfig& kernel,
                                          int permutations, std::uint64_t seed, int workers = 0,
                                          bool pooled = false);

// CSV interfaces.
std::string to_summary_csv(const ExperimentResult& result);
std::string to_pvalues_csv(const ExperimentResult& result);
std::string format_summary_table(const ExperimentResult& result);

/// Flat key = value config file; unknown keys raise ParameterError.
ExperimentConfig parse_experiment_config(const std::string& text);

/// Distribution expressions: er(p), fx, fy, fz, pointmass(...), mixture(...),
/// degree_corrected(...), simplex_mixture(...), affine_beta(...),
/// affine_bernoulli(...).
LatentDistribution parse_distribution(const std::string& expr);

/// Preregistered one-dimensional families fx, fy, fz.
LatentDistribution named_distribution(const std::string& name);

/// Builds the configuration for a named suite at desk or paper scale.
/// Suites: er-size, er-power, sbm-size, sbm-power, rdpg-grid.
ExperimentConfig preset_config(const std::string& suite, const std::string& scale,
                               std::uint64_t seed);

/// Runs the suite named in cfg.name.
ExperimentResult run_suite(const ExperimentConfig& cfg);

namespace detail {

/// Bounded worker pool over [0, count); fn(i) must write only to slot i of
/// any shared output, which keeps results independent of the worker count.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

bool same_distribution(const LatentDistribution& a, const LatentDistribution& b);

}  // namespace detail

}  // namespace casetest
