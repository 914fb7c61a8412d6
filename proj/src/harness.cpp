#include "casetest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "casetest/edge_list.hpp"
#include "casetest/errors.hpp"

namespace casetest {

namespace {

// Substream keys of a replicate stream. Fixed so that correction on/off and
// shared-sample method pairs reproduce each other exactly for a given seed.
enum StreamKey : std::uint64_t {
  kLatentsA = 1,
  kAdjacencyA = 2,
  kLatentsB = 3,
  kAdjacencyB = 4,
  kCorrection = 5,
  kPermutation = 6,
};

struct ReplicateOutcome {
  double p_ase = std::numeric_limits<double>::quiet_NaN();
  double p_case = std::numeric_limits<double>::quiet_NaN();
  bool ase_failed = false;
  bool case_failed = false;
};

ReplicateOutcome run_replicate(const LatentDistribution& dist_a, int n,
                               const LatentDistribution& dist_b, int m, int d, bool want_ase,
                               bool want_case, bool pooled, const KernelConfig& kernel,
                               int permutations, const RandomStream& rng) {
  ReplicateOutcome out;
  Embedding ea, eb;
  try {
    {
      const LatentPositions la = sample_latents(dist_a, n, rng.child(kLatentsA));
      const AdjacencyMatrix adj_a = sample_adjacency(la, rng.child(kAdjacencyA));
      ea = align_signs(ase(adj_a, d));
    }
    {
      const LatentPositions lb = sample_latents(dist_b, m, rng.child(kLatentsB));
      const AdjacencyMatrix adj_b = sample_adjacency(lb, rng.child(kAdjacencyB));
      eb = align_signs(ase(adj_b, d));
    }
  } catch (const RankDeficiencyError&) {
    out.ase_failed = want_ase;
    out.case_failed = want_case;
    return out;
  }
  if (want_ase) {
    try {
      out.p_ase =
          permutation_test(ea.points, eb.points, kernel, permutations, rng.child(kPermutation))
              .p_value;
    } catch (const RankDeficiencyError&) {
      out.ase_failed = true;
    } catch (const DegenerateSampleError&) {
      out.ase_failed = true;
    }
  }
  if (want_case) {
    try {
      const auto [ca, cb] = case_correct(ea, eb, rng.child(kCorrection), pooled);
      out.p_case =
          permutation_test(ca.points, cb.points, kernel, permutations, rng.child(kPermutation))
              .p_value;
    } catch (const RankDeficiencyError&) {
      out.case_failed = true;
    } catch (const DegenerateSampleError&) {
      out.case_failed = true;
    }
  }
  return out;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.c_grid.empty() || cfg.m_grid.empty()) {
    throw ParameterError("experiment config: empty c or m grid");
  }
  for (int c : cfg.c_grid) {
    if (c < 1) throw ParameterError("experiment config: c must be >= 1");
  }
  for (int m : cfg.m_grid) {
    if (m < 2) throw ParameterError("experiment config: m must be >= 2");
    if (cfg.dim > m) throw ParameterError("experiment config: dim exceeds the smallest order");
  }
  if (cfg.dim < 1) throw ParameterError("experiment config: dim must be >= 1");
  if (cfg.replicates < 1) throw ParameterError("experiment config: replicates must be >= 1");
  if (cfg.permutations < 1) throw ParameterError("experiment config: permutations must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ParameterError("experiment config: alpha must lie in (0, 1)");
  }
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

CellResult make_cell(const std::string& experiment, int c, int m, const std::string& method,
                     const ExperimentConfig& cfg, const std::vector<ReplicateOutcome>& outcomes,
                     double seconds, bool use_case) {
  CellResult cell;
  cell.experiment = experiment;
  cell.c = c;
  cell.m = m;
  cell.method = method;
  cell.alpha = cfg.alpha;
  cell.replicates = static_cast<int>(outcomes.size());
  cell.p_values.resize(outcomes.size());
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const bool failed = use_case ? outcomes[r].case_failed : outcomes[r].ase_failed;
    const double p = use_case ? outcomes[r].p_case : outcomes[r].p_ase;
    cell.p_values[r] = p;
    if (failed) {
      ++cell.failures;
    } else if (p <= cfg.alpha) {
      ++cell.rejections;
    }
  }
  cell.rate = static_cast<double>(cell.rejections) / cell.replicates;
  cell.ci_half = 1.96 * std::sqrt(cell.rate * (1.0 - cell.rate) / cell.replicates);
  cell.seconds = seconds;
  if (cell.failures * 100 > cell.replicates) {
    std::fprintf(stderr, "warning: cell %s c=%d m=%d %s: %d of %d replicates failed\n",
                 experiment.c_str(), c, m, method.c_str(), cell.failures, cell.replicates);
  }
  return cell;
}

ExperimentResult run_grid(const ExperimentConfig& cfg, const LatentDistribution& dist_a,
                          const LatentDistribution& dist_b, const std::string& experiment,
                          bool want_ase, bool want_case) {
  validate_config(cfg);
  ExperimentResult result;
  result.name = cfg.name;
  const RandomStream master(cfg.seed);
  for (int c : cfg.c_grid) {
    for (int m : cfg.m_grid) {
      const int n = c * m;
      const auto start = std::chrono::steady_clock::now();
      std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.replicates));
      detail::parallel_for(cfg.replicates, cfg.workers, [&](int r) {
        const RandomStream rep = master.child(experiment)
                                     .child(static_cast<std::uint64_t>(c))
                                     .child(static_cast<std::uint64_t>(m))
                                     .child(static_cast<std::uint64_t>(r));
        outcomes[static_cast<std::size_t>(r)] =
            run_replicate(dist_a, n, dist_b, m, cfg.dim, want_ase, want_case, cfg.pooled,
                          cfg.kernel, cfg.permutations, rep);
      });
      const double seconds = elapsed_seconds(start);
      if (want_ase) {
        result.cells.push_back(make_cell(experiment, c, m, "ase", cfg, outcomes, seconds, false));
      }
      if (want_case) {
        result.cells.push_back(make_cell(experiment, c, m, "case", cfg, outcomes, seconds, true));
      }
    }
  }
  return result;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(trim(s.substr(pos)));
      break;
    }
    parts.push_back(trim(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return parts;
}

double parse_double(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParameterError(std::string(what) + ": cannot parse number '" + token + "'");
  }
}

std::vector<double> parse_number_list(std::string_view s, const char* what) {
  std::string normalized(s);
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string token;
  while (in >> token) out.push_back(parse_double(token, what));
  if (out.empty()) throw ParameterError(std::string(what) + ": empty number list");
  return out;
}

std::vector<int> parse_int_list(std::string_view s, const char* what) {
  std::vector<int> out;
  for (double v : parse_number_list(s, what)) {
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw ParameterError(std::string(what) + ": expected integers");
    }
    out.push_back(i);
  }
  return out;
}

Matrix parse_atom_rows(std::string_view s, const char* what) {
  const std::vector<std::string> rows = split(s, '|');
  std::vector<std::vector<double>> values;
  for (const std::string& row : rows) values.push_back(parse_number_list(row, what));
  const std::size_t d = values.front().size();
  for (const auto& row : values) {
    if (row.size() != d) throw ParameterError(std::string(what) + ": ragged atom rows");
  }
  Matrix m(static_cast<long>(values.size()), static_cast<long>(d));
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) m(static_cast<long>(i), static_cast<long>(j)) = values[i][j];
  }
  return m;
}

// "name(args)" -> {name, args}; plain names return empty args.
std::pair<std::string, std::string> split_call(const std::string& expr) {
  const std::size_t open = expr.find('(');
  if (open == std::string::npos) return {trim(expr), ""};
  if (expr.back() != ')') throw ParameterError("distribution: missing ')' in '" + expr + "'");
  return {trim(expr.substr(0, open)), trim(expr.substr(open + 1, expr.size() - open - 2))};
}

ScalarLaw parse_scalar_law(const std::string& expr, std::string& name_out) {
  const auto [name, args] = split_call(expr);
  name_out = expr;
  if (name == "uniform") return scalar_uniform_law();
  if (name == "point") return scalar_point_mass_law(parse_double(args, "scalar law"));
  throw ParameterError("distribution: unknown scalar law '" + expr + "'");
}

SimplexLaw parse_simplex_law(const std::string& expr, int k, std::string& name_out) {
  const auto [name, args] = split_call(expr);
  name_out = expr;
  if (name == "dirichlet") return simplex_dirichlet_law(k, parse_double(args, "simplex law"));
  if (name == "point") {
    const std::vector<double> values = parse_number_list(args, "simplex law");
    Vector v = Eigen::Map<const Vector>(values.data(), static_cast<long>(values.size()));
    return simplex_point_mass_law(std::move(v));
  }
  throw ParameterError("distribution: unknown simplex law '" + expr + "'");
}

// Key-value arguments of the form "weights=...; atoms=...; law=...".
std::vector<std::pair<std::string, std::string>> parse_call_fields(const std::string& args) {
  std::vector<std::pair<std::string, std::string>> fields;
  for (const std::string& part : split(args, ';')) {
    if (part.empty()) continue;
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("distribution: expected key=value in '" + part + "'");
    }
    fields.emplace_back(trim(std::string_view(part).substr(0, eq)),
                        trim(std::string_view(part).substr(eq + 1)));
  }
  return fields;
}

std::string find_field(const std::vector<std::pair<std::string, std::string>>& fields,
                       const std::string& key, const char* what) {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  throw ParameterError(std::string(what) + ": missing field '" + key + "'");
}

}  // namespace

LatentDistribution named_distribution(const std::string& name) {
  if (name == "fx") return LatentDistribution::affine_beta(0.3, 1.0, 0.3);
  if (name == "fy") return LatentDistribution::affine_beta(0.3, 0.25, 0.3);
  if (name == "fz") return LatentDistribution::affine_bernoulli(0.3, 0.3);
  throw ParameterError("named_distribution: unknown name '" + name + "'");
}

LatentDistribution parse_distribution(const std::string& expr) {
  const std::string text = trim(expr);
  if (text == "fx" || text == "fy" || text == "fz") return named_distribution(text);
  const auto [name, args] = split_call(text);
  if (name == "er") return er_model(parse_double(args, "er"));
  if (name == "pointmass") {
    const std::vector<double> values = parse_number_list(args, "pointmass");
    Vector v = Eigen::Map<const Vector>(values.data(), static_cast<long>(values.size()));
    return LatentDistribution::point_mass(std::move(v));
  }
  if (name == "affine_beta") {
    const std::vector<double> v = parse_number_list(args, "affine_beta");
    if (v.size() != 3) throw ParameterError("affine_beta: expected scale, shape, offset");
    return LatentDistribution::affine_beta(v[0], v[1], v[2]);
  }
  if (name == "affine_bernoulli") {
    const std::vector<double> v = parse_number_list(args, "affine_bernoulli");
    if (v.size() != 2) throw ParameterError("affine_bernoulli: expected scale, offset");
    return LatentDistribution::affine_bernoulli(v[0], v[1]);
  }
  if (name == "mixture" || name == "degree_corrected") {
    const auto fields = parse_call_fields(args);
    const std::vector<double> w = parse_number_list(find_field(fields, "weights", name.c_str()),
                                                    "mixture weights");
    Vector weights = Eigen::Map<const Vector>(w.data(), static_cast<long>(w.size()));
    Matrix atoms = parse_atom_rows(find_field(fields, "atoms", name.c_str()), "mixture atoms");
    if (name == "mixture") return LatentDistribution::mixture(std::move(weights), std::move(atoms));
    std::string law_name;
    ScalarLaw law = parse_scalar_law(find_field(fields, "law", name.c_str()), law_name);
    return LatentDistribution::degree_corrected(std::move(weights), std::move(atoms),
                                                std::move(law), std::move(law_name));
  }
  if (name == "simplex_mixture") {
    const auto fields = parse_call_fields(args);
    Matrix vertices =
        parse_atom_rows(find_field(fields, "vertices", "simplex_mixture"), "simplex vertices");
    std::string law_name;
    SimplexLaw law = parse_simplex_law(find_field(fields, "law", "simplex_mixture"),
                                       static_cast<int>(vertices.rows()), law_name);
    return LatentDistribution::simplex_mixture(std::move(vertices), std::move(law),
                                               std::move(law_name));
  }
  throw ParameterError("distribution: unknown form '" + text + "'");
}

TestResult run_pipeline_once(const LatentDistribution& dist_a, int n,
                             const LatentDistribution& dist_b, int m, int d, bool use_case,
                             bool pooled, const KernelConfig& kernel, int permutations,
                             RandomStream rng) {
  Embedding ea, eb;
  {
    const LatentPositions la = sample_latents(dist_a, n, rng.child(kLatentsA));
    const AdjacencyMatrix adj_a = sample_adjacency(la, rng.child(kAdjacencyA));
    ea = align_signs(ase(adj_a, d));
  }
  {
    const LatentPositions lb = sample_latents(dist_b, m, rng.child(kLatentsB));
    const AdjacencyMatrix adj_b = sample_adjacency(lb, rng.child(kAdjacencyB));
    eb = align_signs(ase(adj_b, d));
  }
  if (use_case) {
    auto corrected = case_correct(ea, eb, rng.child(kCorrection), pooled);
    ea = std::move(corrected.first);
    eb = std::move(corrected.second);
  }
  return permutation_test(ea.points, eb.points, kernel, permutations, rng.child(kPermutation));
}

TestResult test_graph_pair(const AdjacencyMatrix& a, const AdjacencyMatrix& b, int d,
                           bool use_case, bool pooled, const KernelConfig& kernel,
                           int permutations, RandomStream rng) {
  Embedding ea = align_signs(ase(a, d));
  Embedding eb = align_signs(ase(b, d));
  if (use_case) {
    auto corrected = case_correct(ea, eb, rng.child(kCorrection), pooled);
    ea = std::move(corrected.first);
    eb = std::move(corrected.second);
  }
  return permutation_test(ea.points, eb.points, kernel, permutations, rng.child(kPermutation));
}

ExperimentResult run_size_experiment(const ExperimentConfig& cfg) {
  const bool want_ase = cfg.method != MethodSelection::Case;
  const bool want_case = cfg.method != MethodSelection::Ase;
  return run_grid(cfg, cfg.dist_a, cfg.dist_b, cfg.name, want_ase, want_case);
}

ExperimentResult run_power_experiment(const ExperimentConfig& cfg) {
  // The uncorrected test is invalid for c > 1, so power is reported for the
  // corrected embeddings only.
  return run_grid(cfg, cfg.dist_a, cfg.dist_b, cfg.name, false, true);
}

ExperimentResult run_sbm_experiments(const ExperimentConfig& cfg) {
  return detail::same_distribution(cfg.dist_a, cfg.dist_b) ? run_size_experiment(cfg)
                                                           : run_power_experiment(cfg);
}

ExperimentResult run_rdpg_grid(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.rdpg_pairs.empty()) throw ParameterError("rdpg-grid: no distribution pairs");
  ExperimentResult result;
  result.name = cfg.name;
  for (const auto& [small_name, large_name] : cfg.rdpg_pairs) {
    const LatentDistribution small_dist = named_distribution(small_name);
    const LatentDistribution large_dist = named_distribution(large_name);
    const std::string label = cfg.name + ":" + small_name + "-" + large_name;
    const ExperimentResult pair_result =
        run_grid(cfg, large_dist, small_dist, label, false, true);
    result.cells.insert(result.cells.end(), pair_result.cells.begin(), pair_result.cells.end());
  }
  return result;
}

RepeatedTestResult run_repeated_real_test(const std::string& path_a, const std::string& path_b,
                                          int d, int repetitions, const KernelConfig& kernel,
                                          int permutations, std::uint64_t seed, int workers,
                                          bool pooled) {
  if (repetitions < 1) throw ParameterError("run_repeated_real_test: repetitions must be >= 1");
  const AdjacencyMatrix a = load_edge_list(path_a);
  const AdjacencyMatrix b = load_edge_list(path_b);
  if (d > a.order() || d > b.order()) {
    throw DimensionError("run_repeated_real_test: dimension exceeds a graph order");
  }
  const Embedding ea = align_signs(ase(a, d));
  const Embedding eb = align_signs(ase(b, d));
  // The embeddings are deterministic, so the uncorrected cache is shared by
  // every repetition; only the correction noise and permutations are redrawn.
  const PooledPairwiseCache ase_cache(ea.points, eb.points, kernel);

  RepeatedTestResult out;
  out.n = a.order();
  out.m = b.order();
  out.ase_p_values.resize(static_cast<std::size_t>(repetitions));
  out.case_p_values.resize(static_cast<std::size_t>(repetitions));
  const RandomStream master = RandomStream(seed).child("real-data");
  detail::parallel_for(repetitions, workers, [&](int r) {
    const RandomStream rep = master.child(static_cast<std::uint64_t>(r));
    out.ase_p_values[static_cast<std::size_t>(r)] =
        permutation_test(ase_cache, permutations, rep.child(kPermutation)).p_value;
    const auto [ca, cb] = case_correct(ea, eb, rep.child(kCorrection), pooled);
    out.case_p_values[static_cast<std::size_t>(r)] =
        permutation_test(ca.points, cb.points, kernel, permutations, rep.child(kPermutation))
            .p_value;
  });
  return out;
}

namespace {

std::string format_number(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string to_summary_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "experiment,c,m,method,alpha,replicates,rejections,rate,ci_low,ci_high,failures,"
         "seconds\n";
  for (const CellResult& cell : result.cells) {
    out << cell.experiment << ',' << cell.c << ',' << cell.m << ',' << cell.method << ','
        << format_number("%.4g", cell.alpha) << ',' << cell.replicates << ',' << cell.rejections
        << ',' << format_number("%.6f", cell.rate) << ','
        << format_number("%.6f", cell.rate - cell.ci_half) << ','
        << format_number("%.6f", cell.rate + cell.ci_half) << ',' << cell.failures << ','
        << format_number("%.3f", cell.seconds) << '\n';
  }
  return out.str();
}

std::string to_pvalues_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "experiment,c,m,method,replicate,p_value\n";
  for (const CellResult& cell : result.cells) {
    for (std::size_t r = 0; r < cell.p_values.size(); ++r) {
      out << cell.experiment << ',' << cell.c << ',' << cell.m << ',' << cell.method << ',' << r
          << ',' << format_number("%.10g", cell.p_values[r]) << '\n';
    }
  }
  return out.str();
}

std::string format_summary_table(const ExperimentResult& result) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %4s %5s %-6s %8s %19s %9s %9s\n", "experiment", "c",
                "m", "method", "rate", "95% CI", "failures", "seconds");
  out << line;
  for (const CellResult& cell : result.cells) {
    char ci[48];
    std::snprintf(ci, sizeof ci, "[%.3f, %.3f]", cell.rate - cell.ci_half,
                  cell.rate + cell.ci_half);
    std::snprintf(line, sizeof line, "%-24s %4d %5d %-6s %8.4f %19s %9d %9.2f\n",
                  cell.experiment.c_str(), cell.c, cell.m, cell.method.c_str(), cell.rate, ci,
                  cell.failures, cell.seconds);
    out << line;
  }
  return out.str();
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  bool use_median = false;
  double bandwidth = 0.5;
  StatisticKind kind = StatisticKind::GaussianMmd;

  std::istringstream in(text);
  std::string line;
  long line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(entry).substr(0, eq));
    const std::string value = trim(std::string_view(entry).substr(eq + 1));

    if (key == "experiment") {
      cfg.name = value;
    } else if (key == "dist_a") {
      cfg.dist_a = parse_distribution(value);
    } else if (key == "dist_b") {
      cfg.dist_b = parse_distribution(value);
    } else if (key == "c") {
      cfg.c_grid = parse_int_list(value, "c grid");
    } else if (key == "m") {
      cfg.m_grid = parse_int_list(value, "m grid");
    } else if (key == "dim") {
      cfg.dim = parse_int_list(value, "dim").at(0);
    } else if (key == "correction") {
      if (value == "ase") {
        cfg.method = MethodSelection::Ase;
      } else if (value == "case") {
        cfg.method = MethodSelection::Case;
      } else if (value == "both") {
        cfg.method = MethodSelection::Both;
      } else {
        throw ParameterError("config: correction must be ase, case or both");
      }
    } else if (key == "pooled") {
      if (value == "true" || value == "1") {
        cfg.pooled = true;
      } else if (value == "false" || value == "0") {
        cfg.pooled = false;
      } else {
        throw ParameterError("config: pooled must be true or false");
      }
    } else if (key == "bandwidth") {
      if (value == "median") {
        use_median = true;
      } else {
        use_median = false;
        bandwidth = parse_double(value, "bandwidth");
      }
    } else if (key == "statistic") {
      if (value == "mmd") {
        kind = StatisticKind::GaussianMmd;
      } else if (value == "energy") {
        kind = StatisticKind::Energy;
      } else {
        throw ParameterError("config: statistic must be mmd or energy");
      }
    } else if (key == "permutations") {
      cfg.permutations = parse_int_list(value, "permutations").at(0);
    } else if (key == "replicates") {
      cfg.replicates = parse_int_list(value, "replicates").at(0);
    } else if (key == "alpha") {
      cfg.alpha = parse_double(value, "alpha");
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "workers") {
      cfg.workers = parse_int_list(value, "workers").at(0);
    } else if (key == "pairs") {
      cfg.rdpg_pairs.clear();
      for (const std::string& token : split(value, ',')) {
        const std::vector<std::string> names = split(token, '-');
        if (names.size() != 2) {
          throw ParameterError("config: pairs entries must look like fx-fz");
        }
        cfg.rdpg_pairs.emplace_back(names[0], names[1]);
      }
      if (cfg.rdpg_pairs.empty()) throw ParameterError("config: empty pairs list");
    } else {
      throw ParameterError("config line " + std::to_string(line_number) + ": unknown key '" +
                           key + "'");
    }
  }
  cfg.kernel = use_median ? KernelConfig::median(kind) : KernelConfig::fixed(bandwidth, kind);
  return cfg;
}

namespace {

Matrix sbm_atoms(bool alternative) {
  Matrix z(3, 3);
  if (alternative) {
    z << 0.887, 0.153, 0.045, 0.757, 0.486, 0.090, 0.646, 0.627, 0.000;
  } else {
    z << 0.839, 0.326, 0.045, 0.757, 0.486, 0.090, 0.646, 0.627, 0.000;
  }
  return z;
}

Vector sbm_weights() {
  Vector pi(3);
  pi << 0.4, 0.3, 0.3;
  return pi;
}

}  // namespace

ExperimentConfig preset_config(const std::string& suite, const std::string& scale,
                               std::uint64_t seed) {
  const bool desk = scale == "desk";
  if (!desk && scale != "paper") {
    throw ParameterError("preset_config: scale must be desk or paper");
  }
  ExperimentConfig cfg;
  cfg.name = suite;
  cfg.seed = seed;
  cfg.kernel = KernelConfig::fixed(0.5);
  cfg.permutations = 200;
  cfg.alpha = 0.05;
  cfg.replicates = desk ? 200 : 1000;

  const std::vector<int> er_c = desk ? std::vector<int>{1, 2, 5, 7, 10}
                                     : std::vector<int>{1, 2, 5, 7, 10, 15};
  const std::vector<int> sbm_c = {1, 2, 5, 7, 10};
  const std::vector<int> m_desk = {50, 100, 200, 300};
  const std::vector<int> m_paper = {50, 100, 200, 300, 400, 500};

  if (suite == "er-size") {
    cfg.dist_a = er_model(0.8);
    cfg.dist_b = er_model(0.8);
    cfg.c_grid = er_c;
    cfg.m_grid = desk ? m_desk : m_paper;
    cfg.dim = 1;
  } else if (suite == "er-power") {
    cfg.dist_a = er_model(0.8);
    cfg.dist_b = er_model(0.79);
    cfg.c_grid = er_c;
    cfg.m_grid = desk ? m_desk : m_paper;
    cfg.dim = 1;
    cfg.method = MethodSelection::Case;
  } else if (suite == "sbm-size") {
    cfg.dist_a = LatentDistribution::mixture(sbm_weights(), sbm_atoms(false));
    cfg.dist_b = LatentDistribution::mixture(sbm_weights(), sbm_atoms(false));
    cfg.c_grid = sbm_c;
    cfg.m_grid = desk ? m_desk : m_paper;
    cfg.dim = 3;
  } else if (suite == "sbm-power") {
    cfg.dist_a = LatentDistribution::mixture(sbm_weights(), sbm_atoms(false));
    cfg.dist_b = LatentDistribution::mixture(sbm_weights(), sbm_atoms(true));
    cfg.c_grid = sbm_c;
    cfg.m_grid = desk ? m_desk : m_paper;
    cfg.dim = 3;
    cfg.method = MethodSelection::Case;
  } else if (suite == "rdpg-grid") {
    cfg.c_grid = {10};
    cfg.m_grid = {500};
    cfg.dim = 1;
    cfg.method = MethodSelection::Case;
  } else {
    throw ParameterError("preset_config: unknown suite '" + suite + "'");
  }
  return cfg;
}

ExperimentResult run_suite(const ExperimentConfig& cfg) {
  if (cfg.name == "er-size") return run_size_experiment(cfg);
  if (cfg.name == "er-power") return run_power_experiment(cfg);
  if (cfg.name == "sbm-size" || cfg.name == "sbm-power") return run_sbm_experiments(cfg);
  if (cfg.name == "rdpg-grid") return run_rdpg_grid(cfg);
  throw ParameterError("run_suite: unknown suite '" + cfg.name + "'");
}

namespace detail {

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int w = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  w = std::clamp(w, 1, count);
  if (w == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool same_distribution(const LatentDistribution& a, const LatentDistribution& b) {
  if (a.value().index() != b.value().index()) return false;
  auto matrices_equal = [](const Matrix& x, const Matrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  auto vectors_equal = [](const Vector& x, const Vector& y) {
    return x.size() == y.size() && (x.array() == y.array()).all();
  };
  if (const auto* pa = std::get_if<PointMass>(&a.value())) {
    return vectors_equal(pa->point, std::get<PointMass>(b.value()).point);
  }
  if (const auto* ma = std::get_if<Mixture>(&a.value())) {
    const auto& mb = std::get<Mixture>(b.value());
    return vectors_equal(ma->weights, mb.weights) && matrices_equal(ma->atoms, mb.atoms);
  }
  if (const auto* da = std::get_if<DegreeCorrected>(&a.value())) {
    const auto& db = std::get<DegreeCorrected>(b.value());
    return vectors_equal(da->base.weights, db.base.weights) &&
           matrices_equal(da->base.atoms, db.base.atoms) && da->law_name == db.law_name;
  }
  if (const auto* sa = std::get_if<SimplexMixture>(&a.value())) {
    const auto& sb = std::get<SimplexMixture>(b.value());
    return matrices_equal(sa->vertices, sb.vertices) && sa->law_name == sb.law_name;
  }
  const auto& fa = std::get<AffineBeta>(a.value());
  const auto& fb = std::get<AffineBeta>(b.value());
  return fa.scale == fb.scale && fa.shape == fb.shape && fa.offset == fb.offset &&
         fa.bernoulli_limit == fb.bernoulli_limit;
}

}  // namespace detail

}  // namespace casetest
