#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "casetest/edge_list.hpp"
#include "casetest/errors.hpp"
#include "casetest/harness.hpp"

namespace {

using namespace casetest;

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CASETEST_SEED")) {
    try {
      return static_cast<std::uint64_t>(std::stoull(env));
    } catch (const std::exception&) {
      throw ParameterError("CASETEST_SEED must be a non-negative integer");
    }
  }
  return 1;
}

KernelConfig make_kernel(const std::string& bandwidth, const std::string& statistic) {
  StatisticKind kind;
  if (statistic == "mmd") {
    kind = StatisticKind::GaussianMmd;
  } else if (statistic == "energy") {
    kind = StatisticKind::Energy;
  } else {
    throw ParameterError("--statistic must be mmd or energy");
  }
  if (bandwidth == "median") return KernelConfig::median(kind);
  char* end = nullptr;
  const double sigma = std::strtod(bandwidth.c_str(), &end);
  if (end == bandwidth.c_str() || *end != '\0' || !(sigma > 0.0)) {
    throw ParameterError("--bandwidth must be 'median' or a positive number");
  }
  return KernelConfig::fixed(sigma, kind);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << content;
  if (!out) throw ParseError("failed writing file: " + path);
}

struct TestOptions {
  std::string graph_a, graph_b;
  int dim = 0;
  std::string correction = "case";
  std::string bandwidth = "0.5";
  std::string statistic = "mmd";
  int permutations = 200;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool pooled = false;
  bool json = false;
  int repeat = 1;
  std::string pvalues_out;
  int workers = 0;
};

double vector_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

int cmd_test(const TestOptions& opt) {
  if (opt.correction != "case" && opt.correction != "none") {
    throw ParameterError("--correction must be case or none");
  }
  const std::uint64_t seed = opt.seed_given ? opt.seed : default_seed();
  const KernelConfig kernel = make_kernel(opt.bandwidth, opt.statistic);
  const bool use_case = opt.correction == "case";

  if (opt.repeat < 1) throw ParameterError("--repeat must be >= 1");
  if (opt.repeat > 1) {
    const RepeatedTestResult rep =
        run_repeated_real_test(opt.graph_a, opt.graph_b, opt.dim, opt.repeat, kernel,
                               opt.permutations, seed, opt.workers, opt.pooled);
    if (!opt.pvalues_out.empty()) {
      std::ostringstream csv;
      csv << "method,repetition,p_value\n";
      for (std::size_t r = 0; r < rep.ase_p_values.size(); ++r) {
        csv << "ase," << r << ',' << fmt12(rep.ase_p_values[r]) << '\n';
      }
      for (std::size_t r = 0; r < rep.case_p_values.size(); ++r) {
        csv << "case," << r << ',' << fmt12(rep.case_p_values[r]) << '\n';
      }
      write_file(opt.pvalues_out, csv.str());
    }
    const double med_ase = vector_median(rep.ase_p_values);
    const double med_case = vector_median(rep.case_p_values);
    if (opt.json) {
      std::ostringstream out;
      out << "{\"command\":\"test\",\"graph_a\":\"" << json_escape(opt.graph_a)
          << "\",\"graph_b\":\"" << json_escape(opt.graph_b) << "\",\"n\":" << rep.n
          << ",\"m\":" << rep.m << ",\"dim\":" << opt.dim << ",\"repeat\":" << opt.repeat
          << ",\"permutations\":" << opt.permutations << ",\"seed\":" << seed
          << ",\"median_p_value_ase\":" << fmt12(med_ase)
          << ",\"median_p_value_case\":" << fmt12(med_case) << ",\"p_values_ase\":[";
      for (std::size_t r = 0; r < rep.ase_p_values.size(); ++r) {
        out << (r ? "," : "") << fmt12(rep.ase_p_values[r]);
      }
      out << "],\"p_values_case\":[";
      for (std::size_t r = 0; r < rep.case_p_values.size(); ++r) {
        out << (r ? "," : "") << fmt12(rep.case_p_values[r]);
      }
      out << "]}\n";
      std::cout << out.str();
    } else {
      std::printf("graphs:        %s (n=%d)  %s (m=%d)\n", opt.graph_a.c_str(), rep.n,
                  opt.graph_b.c_str(), rep.m);
      std::printf("repetitions:   %d  (permutations %d, seed %llu)\n", opt.repeat,
                  opt.permutations, static_cast<unsigned long long>(seed));
      std::printf("median p:      ase %s   case %s\n", fmt12(med_ase).c_str(),
                  fmt12(med_case).c_str());
    }
    return 0;
  }

  const AdjacencyMatrix a = load_edge_list(opt.graph_a);
  const AdjacencyMatrix b = load_edge_list(opt.graph_b);
  if (opt.dim > a.order() || opt.dim > b.order()) {
    throw DimensionError("--dim exceeds the order of a graph");
  }
  const TestResult res = test_graph_pair(a, b, opt.dim, use_case, opt.pooled, kernel,
                                         opt.permutations, RandomStream(seed));
  if (opt.json) {
    std::ostringstream out;
    out << "{\"command\":\"test\",\"graph_a\":\"" << json_escape(opt.graph_a)
        << "\",\"graph_b\":\"" << json_escape(opt.graph_b) << "\",\"n\":" << res.n
        << ",\"m\":" << res.m << ",\"dim\":" << opt.dim << ",\"correction\":\"" << opt.correction
        << "\",\"pooled\":" << (opt.pooled ? "true" : "false") << ",\"statistic_kind\":\""
        << opt.statistic << "\",\"bandwidth\":" << fmt12(res.bandwidth_used)
        << ",\"permutations\":" << opt.permutations << ",\"seed\":" << seed
        << ",\"statistic\":" << fmt12(res.statistic) << ",\"p_value\":" << fmt12(res.p_value)
        << "}\n";
    std::cout << out.str();
  } else {
    std::printf("graphs:        %s (n=%d)  %s (m=%d)\n", opt.graph_a.c_str(), res.n,
                opt.graph_b.c_str(), res.m);
    std::printf("dim:           %d\n", opt.dim);
    std::printf("correction:    %s%s\n", opt.correction.c_str(), opt.pooled ? " (pooled)" : "");
    if (opt.statistic == "mmd") {
      std::printf("statistic:     mmd (bandwidth %s)\n", fmt12(res.bandwidth_used).c_str());
    } else {
      std::printf("statistic:     energy\n");
    }
    std::printf("permutations:  %d (seed %llu)\n", opt.permutations,
                static_cast<unsigned long long>(seed));
    std::printf("T:             %s\n", fmt12(res.statistic).c_str());
    std::printf("p-value:       %s\n", fmt12(res.p_value).c_str());
  }
  return 0;
}

struct ExperimentOptions {
  std::string suite;
  std::string scale = "desk";
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = -1;
};

int cmd_experiment(const ExperimentOptions& opt) {
  ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ParseError("cannot open config file: " + opt.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    cfg = parse_experiment_config(text.str());
  } else if (!opt.suite.empty()) {
    cfg = preset_config(opt.suite, opt.scale, default_seed());
  } else {
    throw ParameterError("experiment: provide --suite or --config");
  }
  if (opt.seed_given) cfg.seed = opt.seed;
  if (opt.workers >= 0) cfg.workers = opt.workers;

  const ExperimentResult result = run_suite(cfg);
  std::cout << format_summary_table(result);

  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) throw ParseError("cannot create output dir: " + opt.out_dir);
    const std::string base = (std::filesystem::path(opt.out_dir) / cfg.name).string();
    write_file(base + "_summary.csv", to_summary_csv(result));
    write_file(base + "_pvalues.csv", to_pvalues_csv(result));
    std::printf("wrote %s_summary.csv and %s_pvalues.csv\n", base.c_str(), base.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent distribution two-sample tests for random dot product graphs"};
  app.require_subcommand(1);

  TestOptions test_opt;
  CLI::App* test = app.add_subcommand(
      "test", "Test two edge-list graphs for equal latent distributions");
  test->add_option("graph-a", test_opt.graph_a, "first edge-list file")->required();
  test->add_option("graph-b", test_opt.graph_b, "second edge-list file")->required();
  test->add_option("--dim", test_opt.dim, "embedding dimension")->required();
  test->add_option("--correction", test_opt.correction, "case | none (default case)");
  test->add_option("--bandwidth", test_opt.bandwidth, "median | sigma (default 0.5)");
  test->add_option("--statistic", test_opt.statistic, "mmd | energy (default mmd)");
  test->add_option("--permutations", test_opt.permutations, "permutation count (default 200)");
  test->add_option("--seed", test_opt.seed, "random seed (default $CASETEST_SEED or 1)")
      ->each([&](const std::string&) { test_opt.seed_given = true; });
  test->add_flag("--pooled", test_opt.pooled, "pool second moments across both graphs");
  test->add_flag("--json", test_opt.json, "emit a JSON report");
  test->add_option("--repeat", test_opt.repeat,
                   "repeat correction + permutations this many times (default 1)");
  test->add_option("--pvalues-out", test_opt.pvalues_out,
                   "CSV output for per-repetition p-values (with --repeat)");
  test->add_option("--workers", test_opt.workers, "worker threads (default all cores)");

  ExperimentOptions exp_opt;
  CLI::App* exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment suite");
  exp->add_option("--suite", exp_opt.suite,
                  "er-size | er-power | sbm-size | sbm-power | rdpg-grid");
  exp->add_option("--scale", exp_opt.scale, "desk | paper (default desk)");
  exp->add_option("--config", exp_opt.config_path, "flat key=value config file");
  exp->add_option("--seed", exp_opt.seed, "random seed (default $CASETEST_SEED or 1)")
      ->each([&](const std::string&) { exp_opt.seed_given = true; });
  exp->add_option("--out", exp_opt.out_dir, "directory for summary/p-value CSV files");
  exp->add_option("--workers", exp_opt.workers, "worker threads (default all cores)");

  try {
    app.parse(argc, argv);
    if (test->parsed()) return cmd_test(test_opt);
    if (exp->parsed()) return cmd_experiment(exp_opt);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const RankDeficiencyError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const DegenerateSampleError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const ModelViolationError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
