#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "actnas/cost_table.hpp"
#include "actnas/nwot.hpp"
#include "actnas/report.hpp"
#include "actnas/search.hpp"

namespace actnas {

/// Process exit codes of the actnas tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,       // I/O and anything unexpected
  kExitConfig = 2,        // bad flags or malformed input files
  kExitInfeasible = 3,    // search found no solution within the budget
  kExitEstimator = 4,     // an estimator failed while building tables
  kExitMissingTable = 5,  // a table needed by search/report is absent
};

struct RunConfig {
  std::filesystem::path model;
  /// Profile JSON files, measured table CSVs, or built-in profile names.
  std::vector<std::string> profiles;
  std::filesystem::path tables_dir = "tables";
  std::string method = "exact";
  Metric objective = Metric::Latency;
  Metric budget_metric = Metric::Accuracy;
  double budget = kUnbounded;
  std::string device;
  int top_k = 1;
  int diversity = kDefaultDiversity;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  int iterations = kDefaultRandomIterations;
  int naive_k = 3;
  ActivationKind early = ActivationKind::ReLU;
  ActivationKind rest = ActivationKind::SiLU;
  ActivationKind base = ActivationKind::SiLU;
  ActivationKind alt = ActivationKind::ReLU;
  std::vector<ActivationKind> candidates{kAllActivations.begin(), kAllActivations.end()};
  int batch_size = kDefaultBatchSize;
  int runs = 50;
  /// Latency measurement input; empty keeps the model's own input.
  Shape input_shape;
  unsigned threads = 1;
  std::vector<std::filesystem::path> proposals;
  std::vector<ActivationKind> baselines{ActivationKind::SiLU, ActivationKind::Hardswish};
  std::filesystem::path values;
};

/// Accuracy tables use weight_seed = seed and batch_seed = seed + 1.
NwotConfig nwot_config(const RunConfig& config);

/// Writes accuracy_nwot.csv plus latency_<device>.csv / memory_<device>.csv
/// for every profile into config.out (or tables_dir when out is empty).
/// Measured CSVs are checked against the model and copied through.
std::vector<std::filesystem::path> cmd_bench_tables(const RunConfig& config);

/// Loads the tables, runs the configured method and writes the proposals
/// JSON to config.out (default tables_dir/proposals.json).
SearchResult cmd_search(const RunConfig& config);

/// Builds the improvement report from proposal files over the objective
/// tables in tables_dir, or from a values CSV. Writes <out>.txt and
/// <out>.csv when out is set.
Report cmd_report(const RunConfig& config);

NwotScore cmd_nwot(const RunConfig& config);

/// Full command-line entry point; returns an ExitCode.
int run_cli(int argc, char** argv);

}  // namespace actnas
