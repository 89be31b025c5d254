#include "actnas/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "actnas/device.hpp"

namespace actnas {

namespace fs = std::filesystem;

NwotConfig nwot_config(const RunConfig& config) {
  NwotConfig nwot;
  nwot.batch_size = config.batch_size;
  nwot.weight_seed = config.seed;
  nwot.batch_seed = config.seed + 1;
  return nwot;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

// Measured tables must describe the same slots as the model.
void check_measured_table(const CostTable& table, const ModelSpec& model) {
  const CostMatrix m = to_matrix(table);
  if (static_cast<std::size_t>(m.layers()) != model.size()) {
    throw ConfigError("measured " + std::string(to_string(table.metric)) + " table for '" +
                      table.device + "' has " + std::to_string(m.layers()) +
                      " layers; model has " + std::to_string(model.size()));
  }
  for (std::size_t l = 0; l < model.size(); ++l) {
    if (m.layer_names[l] != model.layers[l].name) {
      throw ConfigError("measured table layer " + std::to_string(l) + " is '" + m.layer_names[l] +
                        "'; model has '" + model.layers[l].name + "'");
    }
  }
}

DeviceProfile resolve_profile(const std::string& spec) {
  if (fs::exists(spec)) return load_profile(spec);
  return builtin_profile(spec);
}

fs::path find_table(const fs::path& dir, Metric metric, const std::string& device) {
  if (metric == Metric::Accuracy) {
    const fs::path p = dir / table_filename(metric, device.empty() || device == "nwot" ? "nwot" : device);
    if (fs::exists(p)) return p;
    throw MissingTableError("missing accuracy table " + p.string());
  }
  if (!device.empty()) {
    const fs::path p = dir / table_filename(metric, device);
    if (!fs::exists(p)) throw MissingTableError("missing table " + p.string());
    return p;
  }
  std::vector<fs::path> matches;
  const std::string prefix = std::string(to_string(metric)) + "_";
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") matches.push_back(entry.path());
    }
  }
  if (matches.empty()) {
    throw MissingTableError("no " + std::string(to_string(metric)) + " table in " + dir.string());
  }
  if (matches.size() > 1) {
    throw ConfigError("several " + std::string(to_string(metric)) + " tables in " + dir.string() +
                      "; pass --device");
  }
  return matches.front();
}

std::vector<fs::path> tables_for_metric(const fs::path& dir, Metric metric) {
  std::vector<fs::path> out;
  const std::string prefix = std::string(to_string(metric)) + "_";
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".csv") out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) {
    throw MissingTableError("no " + std::string(to_string(metric)) + " tables in " + dir.string());
  }
  return out;
}

CostMatrix load_matrix(const fs::path& dir, Metric metric, const std::string& device) {
  return to_matrix(load_table(find_table(dir, metric, device)));
}

}  // namespace

std::vector<fs::path> cmd_bench_tables(const RunConfig& config) {
  const ModelSpec model = load_model(config.model);
  const fs::path dir = config.out.empty() ? config.tables_dir : config.out;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const auto save = [&](const CostTable& table) {
    const fs::path path = dir / table_filename(table.metric, table.device);
    write_file(path, to_csv(table));
    written.push_back(path);
  };

  save(build_accuracy_table(model, config.candidates, nwot_config(config), config.threads));

  MeasurementConfig measurement;
  measurement.runs = config.runs;
  measurement.input_shape = config.input_shape;
  for (const std::string& spec : config.profiles) {
    if (fs::path(spec).extension() == ".csv") {
      const CostTable table = load_table(spec);
      check_measured_table(table, model);
      save(table);
      continue;
    }
    const DeviceProfile profile = resolve_profile(spec);
    save(build_latency_table(model, config.candidates, profile, measurement, config.threads));
    save(build_memory_table(model, config.candidates, profile, config.threads));
  }
  return written;
}

SearchResult cmd_search(const RunConfig& config) {
  const fs::path& dir = config.tables_dir;
  SearchConstraints constraints{config.objective, config.budget_metric, config.budget};
  validate(constraints);
  const auto device_for = [&](Metric m) { return m == Metric::Accuracy ? std::string() : config.device; };
  const auto problem = [&] {
    return SearchProblem(load_matrix(dir, config.objective, device_for(config.objective)),
                         load_matrix(dir, config.budget_metric, device_for(config.budget_metric)),
                         constraints);
  };

  SearchResult result;
  result.method = config.method;
  result.constraints = constraints;
  if (config.method == "exact") {
    result = exact_search(problem(), config.top_k, config.diversity);
  } else if (config.method == "random") {
    result.proposals.push_back(random_search(problem(), config.iterations, config.seed));
  } else if (config.method == "lzcm") {
    const Proposal p = lzcm_search(load_matrix(dir, Metric::Accuracy, {}), config.base, config.alt);
    result.proposals.push_back(problem().evaluate(p.assignment));
  } else if (config.method == "naive") {
    if (!config.model.empty()) {
      const ModelSpec model = load_model(config.model);
      const Proposal p = naive_assignment(model, config.naive_k, config.early, config.rest);
      try {
        result.proposals.push_back(problem().evaluate(p.assignment));
      } catch (const MissingTableError&) {
        result.proposals.push_back(p);
      }
    } else {
      const SearchProblem prob = problem();
      result.proposals.push_back(prob.evaluate(
          naive_assignment(prob.layers(), config.naive_k, config.early, config.rest).assignment));
    }
  } else {
    throw ConfigError("unknown method '" + config.method + "'");
  }

  const fs::path out = config.out.empty() ? dir / "proposals.json" : config.out;
  write_file(out, dump_result(result));
  return result;
}

Report cmd_report(const RunConfig& config) {
  Report report;
  if (!config.values.empty()) {
    std::ifstream in(config.values);
    if (!in) throw ConfigError("cannot open values file " + config.values.string());
    std::vector<std::string> devices;
    const auto models = read_values_csv(in, devices);
    std::vector<std::string> labels;
    for (ActivationKind kind : config.baselines) labels.push_back(std::string(to_string(kind)));
    // Values files name baselines by plain label; accept either form.
    for (std::string& label : labels) {
      const bool plain = std::any_of(models.begin(), models.end(),
                                     [&](const LabeledValues& m) { return m.label == label; });
      if (!plain) label = "uniform_" + label;
    }
    report = build_report(std::string(to_string(config.objective)), devices, models, labels);
  } else {
    std::vector<CostMatrix> matrices;
    for (const fs::path& p : tables_for_metric(config.tables_dir, config.objective)) {
      matrices.push_back(to_matrix(load_table(p)));
    }
    std::vector<std::pair<std::string, Assignment>> proposals;
    for (const fs::path& path : config.proposals) {
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open proposals file " + path.string());
      std::stringstream buffer;
      buffer << in.rdbuf();
      const SearchResult result = parse_result(buffer.str());
      for (const Proposal& p : result.proposals) {
        std::string label = result.method + std::to_string(p.rank);
        const bool taken = std::any_of(proposals.begin(), proposals.end(),
                                       [&](const auto& q) { return q.first == label; });
        if (taken) label = path.stem().string() + "/" + label;
        proposals.emplace_back(label, p.assignment);
      }
    }
    report = report_from_matrices(matrices, proposals, config.baselines);
  }
  if (!config.out.empty()) {
    write_file(fs::path(config.out.string() + ".txt"), format_report_text(report));
    write_file(fs::path(config.out.string() + ".csv"), format_report_csv(report));
  }
  return report;
}

NwotScore cmd_nwot(const RunConfig& config) {
  return score_model(load_model(config.model), nwot_config(config));
}

// --- argument parsing --------------------------------------------------------

namespace {

std::uint64_t seed_from_env() {
  const char* env = std::getenv("ACTNAS_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long value = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(std::string("ACTNAS_SEED is not an unsigned integer: ") + env);
  }
}

std::vector<ActivationKind> parse_activation_list(const std::vector<std::string>& names) {
  std::vector<ActivationKind> out;
  for (const std::string& n : names) out.push_back(parse_activation(n));
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Mixed-activation architecture search over per-layer cost tables"};
  app.require_subcommand(1);

  RunConfig config;
  config.threads = std::max(1u, std::thread::hardware_concurrency());
  std::string model, tables_dir, out, objective = "latency", budget_metric = "accuracy";
  std::string budget = "inf", values;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> candidates, baselines, proposals;
  std::string early = "relu", rest = "silu", base = "silu", alt = "relu";

  const auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Global seed (falls back to ACTNAS_SEED, then 0)");
  };

  auto* bench = app.add_subcommand("bench-tables", "Build accuracy/latency/memory tables");
  bench->add_option("--model", model, "Model JSON")->required();
  bench->add_option("--profile", config.profiles,
                    "Profile JSON, measured table CSV, or built-in name (npu, jetson-gpu, "
                    "cortex-a53, cortex-a57); repeatable");
  bench->add_option("--out", out, "Output directory (default: --tables-dir)");
  bench->add_option("--tables-dir", tables_dir, "Table directory");
  bench->add_option("--candidates", candidates, "Candidate activations (default: all five)")
      ->delimiter(',');
  bench->add_option("--batch-size", config.batch_size, "NWOT mini-batch size");
  bench->add_option("--runs", config.runs, "Simulated latency runs to average");
  bench->add_option("--input-shape", config.input_shape,
                    "Latency input C,H,W; conv layers scale by the spatial area")
      ->delimiter(',');
  bench->add_option("--threads", config.threads, "Worker threads");
  add_seed(bench);

  auto* search = app.add_subcommand("search", "Search mixed-activation assignments");
  search->add_option("--tables-dir", tables_dir, "Table directory")->required();
  search->add_option("--method", config.method, "lzcm | naive | random | exact")
      ->check(CLI::IsMember({"lzcm", "naive", "random", "exact"}));
  search->add_option("--objective", objective, "Metric to minimize (accuracy: maximize)");
  search->add_option("--budget-metric", budget_metric, "Constrained metric");
  search->add_option("--budget", budget, "Maximum summed cost delta of the budget metric (inf = none)");
  search->add_option("--device", config.device, "Device tag of latency/memory tables");
  search->add_option("--top-k", config.top_k, "Number of proposals (exact)");
  search->add_option("--diversity", config.diversity, "Minimum Hamming distance between proposals");
  search->add_option("--iterations", config.iterations, "Random search iterations");
  search->add_option("--model", model, "Model JSON (naive method)");
  search->add_option("--naive-k", config.naive_k, "Slots replaced near the input (naive)");
  search->add_option("--early", early, "Activation of the first slots (naive)");
  search->add_option("--rest", rest, "Activation of the remaining slots (naive)");
  search->add_option("--base", base, "Base activation (lzcm)");
  search->add_option("--alt", alt, "Alternative activation (lzcm)");
  search->add_option("--out", out, "Output JSON (default: <tables-dir>/proposals.json)");
  add_seed(search);

  auto* report = app.add_subcommand("report", "Improvement-percentage report");
  report->add_option("--tables-dir", tables_dir, "Table directory");
  report->add_option("--proposals", proposals, "Proposal JSON files; repeatable");
  report->add_option("--objective", objective, "Metric to report");
  report->add_option("--baselines", baselines, "Uniform baselines (default: silu,hardswish)")
      ->delimiter(',');
  report->add_option("--values", values, "CSV of label,device,value instead of tables");
  report->add_option("--out", out, "Output prefix for .txt and .csv");

  auto* nwot = app.add_subcommand("nwot", "NWOT score of a single model");
  nwot->add_option("--model", model, "Model JSON")->required();
  nwot->add_option("--batch-size", config.batch_size, "Mini-batch size");
  add_seed(nwot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    config.model = model;
    if (!tables_dir.empty()) config.tables_dir = tables_dir;
    config.out = out;
    config.values = values;
    config.objective = parse_metric(objective);
    config.budget_metric = parse_metric(budget_metric);
    config.budget = parse_double(budget);
    config.seed = seed ? *seed : seed_from_env();
    if (!candidates.empty()) config.candidates = parse_activation_list(candidates);
    if (!baselines.empty()) config.baselines = parse_activation_list(baselines);
    for (const std::string& p : proposals) config.proposals.emplace_back(p);
    config.early = parse_activation(early);
    config.rest = parse_activation(rest);
    config.base = parse_activation(base);
    config.alt = parse_activation(alt);

    if (bench->parsed()) {
      for (const fs::path& p : cmd_bench_tables(config)) std::cout << p.string() << "\n";
    } else if (search->parsed()) {
      const SearchResult result = cmd_search(config);
      for (const Proposal& p : result.proposals) {
        std::cout << "rank " << p.rank << ": objective_total=" << format_double(p.objective_total)
                  << " budget_total=" << format_double(p.budget_total) << "\n";
      }
      if (result.truncated) std::cout << "(truncated: fewer diverse proposals than requested)\n";
    } else if (report->parsed()) {
      std::cout << format_report_text(cmd_report(config));
    } else if (nwot->parsed()) {
      const NwotScore score = cmd_nwot(config);
      std::cout << "nwot_score=" << format_double(score.value)
                << " degenerate=" << (score.degenerate ? "true" : "false") << "\n";
    }
  } catch (const NoSolutionError& e) {
    std::cerr << "actnas: infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const EstimatorError& e) {
    std::cerr << "actnas: estimator failure: " << e.what() << "\n";
    return kExitEstimator;
  } catch (const MissingTableError& e) {
    std::cerr << "actnas: missing table: " << e.what() << "\n";
    return kExitMissingTable;
  } catch (const ConfigError& e) {
    std::cerr << "actnas: config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "actnas: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace actnas
