#include "actnas/cost_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "parallel.hpp"

namespace actnas {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Latency:
      return "latency";
    case Metric::Accuracy:
      return "accuracy";
    case Metric::Memory:
      return "memory";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "latency") return Metric::Latency;
  if (name == "accuracy") return Metric::Accuracy;
  if (name == "memory") return Metric::Memory;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::string_view metric_unit(Metric metric) {
  switch (metric) {
    case Metric::Latency:
      return "ms";
    case Metric::Accuracy:
      return "nwot";
    case Metric::Memory:
      return "KB";
  }
  return "";
}

Eigen::Index CostMatrix::column(ActivationKind kind) const {
  const auto it = std::find(columns.begin(), columns.end(), kind);
  if (it == columns.end()) {
    throw ConfigError(std::string(to_string(metric)) + " matrix for device '" + device +
                      "' has no column '" + std::string(to_string(kind)) + "'");
  }
  return static_cast<Eigen::Index>(it - columns.begin());
}

bool CostMatrix::has_column(ActivationKind kind) const {
  return std::find(columns.begin(), columns.end(), kind) != columns.end();
}

double CostMatrix::delta(std::size_t layer, ActivationKind kind) const {
  return values(static_cast<Eigen::Index>(layer), column(kind));
}

bool CostMatrix::operator==(const CostMatrix& other) const {
  return metric == other.metric && device == other.device &&
         reference_total == other.reference_total && layer_names == other.layer_names &&
         columns == other.columns && values.rows() == other.values.rows() &&
         values.cols() == other.values.cols() && values == other.values;
}

CostTable build_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                      Metric metric, std::string device, double reference_total,
                      const DeltaEstimator& estimator, unsigned threads) {
  validate(model);
  const auto replacements = single_replacements(model, candidates);
  CostTable table;
  table.metric = metric;
  table.device = std::move(device);
  table.reference_total = reference_total;
  table.entries.resize(replacements.size());

  detail::parallel_for(replacements.size(), threads, [&](std::size_t i) {
    const Replacement& r = replacements[i];
    CostEntry& entry = table.entries[i];
    entry.layer_index = r.layer;
    entry.layer_name = model.layers[r.layer].name;
    entry.activation = r.activation;
    entry.reference_value = reference_total;
    if (model.layers[r.layer].activation == r.activation) {
      entry.delta_value = 0.0;
      return;
    }
    try {
      entry.delta_value = estimator(apply_replacement(model, r));
    } catch (const std::exception& e) {
      throw EstimatorError("estimator failed for layer " + std::to_string(r.layer) + " ('" +
                           entry.layer_name + "'), activation " +
                           std::string(to_string(r.activation)) + ": " + e.what());
    }
    if (std::isnan(entry.delta_value)) {
      throw EstimatorError("estimator returned NaN for layer " + std::to_string(r.layer) +
                           ", activation " + std::string(to_string(r.activation)));
    }
  });
  return table;
}

CostTable build_accuracy_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                               const NwotConfig& config, unsigned threads) {
  validate(model);
  const ModelWeights weights = init_weights(model, config.weight_seed);
  const MiniBatch batch = make_minibatch(model, config.batch_size, config.batch_seed);
  const ReferenceForward forward(model, weights, batch);
  const NwotScore reference = nwot_score(forward.reference_codes());
  CostTable table = build_table(
      model, candidates, Metric::Accuracy, "nwot", reference.value,
      [&](const ModelSpec& candidate) {
        return score_difference(forward.score(candidate), reference);
      },
      threads);
  table.weight_seed = config.weight_seed;
  table.batch_seed = config.batch_seed;
  return table;
}

CostMatrix to_matrix(const CostTable& table) {
  if (table.entries.empty()) throw ConfigError("cannot build a matrix from an empty table");
  std::size_t layers = 0;
  std::vector<ActivationKind> kinds;
  for (const CostEntry& e : table.entries) {
    layers = std::max(layers, e.layer_index + 1);
    kinds.push_back(e.activation);
  }
  CostMatrix m;
  m.metric = table.metric;
  m.device = table.device;
  m.reference_total = table.reference_total;
  m.columns = canonical_order(kinds);
  m.layer_names.assign(layers, {});
  m.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(layers),
                                       static_cast<Eigen::Index>(m.columns.size()),
                                       std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(layers * m.columns.size(), false);
  for (const CostEntry& e : table.entries) {
    const auto col = m.column(e.activation);
    const auto slot = e.layer_index * m.columns.size() + static_cast<std::size_t>(col);
    if (seen[slot]) {
      throw ConfigError("duplicate table entry for layer " + std::to_string(e.layer_index) +
                        ", activation " + std::string(to_string(e.activation)));
    }
    if (!m.layer_names[e.layer_index].empty() && m.layer_names[e.layer_index] != e.layer_name) {
      throw ConfigError("inconsistent layer names for layer " + std::to_string(e.layer_index));
    }
    seen[slot] = true;
    m.layer_names[e.layer_index] = e.layer_name;
    m.values(static_cast<Eigen::Index>(e.layer_index), col) = e.delta_value;
  }
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
      if (!seen[l * m.columns.size() + c]) {
        throw ConfigError("table is missing layer " + std::to_string(l) + ", activation " +
                          std::string(to_string(m.columns[c])));
      }
    }
  }
  return m;
}

CostTable to_table(const CostMatrix& matrix) {
  CostTable table;
  table.metric = matrix.metric;
  table.device = matrix.device;
  table.reference_total = matrix.reference_total;
  for (Eigen::Index l = 0; l < matrix.values.rows(); ++l) {
    for (Eigen::Index c = 0; c < matrix.values.cols(); ++c) {
      table.entries.push_back({static_cast<std::size_t>(l),
                               matrix.layer_names[static_cast<std::size_t>(l)],
                               matrix.columns[static_cast<std::size_t>(c)], matrix.reference_total,
                               matrix.values(l, c)});
    }
  }
  return table;
}

double predicted_total(const CostMatrix& matrix, std::span<const ActivationKind> assignment) {
  if (static_cast<Eigen::Index>(assignment.size()) != matrix.layers()) {
    throw ConfigError("assignment length does not match matrix layers");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < assignment.size(); ++l) sum += matrix.delta(l, assignment[l]);
  return matrix.reference_total + sum;
}

double improvement_pct(double reference_value, double new_value) {
  if (!(reference_value > 0.0) || !std::isfinite(reference_value)) {
    throw ConfigError("improvement_pct: reference value must be positive");
  }
  return (reference_value - new_value) / reference_value * 100.0;
}

// --- CSV --------------------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("invalid number '" + std::string(text) + "'");
  }
  return value;
}

namespace {

constexpr std::string_view kHeader = "layer_index,layer_name,activation,reference_value,delta_value";

std::string format_seed(const std::optional<std::uint64_t>& seed) {
  return seed ? std::to_string(*seed) : std::string("none");
}

std::optional<std::uint64_t> parse_seed(const std::string& text) {
  if (text == "none") return std::nullopt;
  std::uint64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("invalid seed '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

void write_csv(const CostTable& table, std::ostream& out) {
  if (table.device.empty() || table.device.find_first_of(" \t\n,=") != std::string::npos) {
    throw ConfigError("device tag must be non-empty without whitespace, commas or '='");
  }
  out << "# metric=" << to_string(table.metric) << " device=" << table.device
      << " reference_total=" << format_double(table.reference_total)
      << " weight_seed=" << format_seed(table.weight_seed)
      << " batch_seed=" << format_seed(table.batch_seed) << "\n";
  out << kHeader << "\n";
  for (const CostEntry& e : table.entries) {
    out << e.layer_index << ',' << e.layer_name << ',' << to_string(e.activation) << ','
        << format_double(e.reference_value) << ',' << format_double(e.delta_value) << "\n";
  }
}

CostTable read_csv(std::istream& in) {
  CostTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw ConfigError("cost table must start with a '# metric=...' metadata line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::map<std::string, std::string> meta;
  for (const std::string& token : split(line.substr(2), ' ')) {
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed metadata token '" + token + "'");
    meta[token.substr(0, eq)] = token.substr(eq + 1);
  }
  for (const char* key : {"metric", "device", "reference_total"}) {
    if (!meta.count(key)) throw ConfigError(std::string("metadata is missing '") + key + "'");
  }
  table.metric = parse_metric(meta["metric"]);
  table.device = meta["device"];
  table.reference_total = parse_double(meta["reference_total"]);
  table.weight_seed = meta.count("weight_seed") ? parse_seed(meta["weight_seed"]) : std::nullopt;
  table.batch_seed = meta.count("batch_seed") ? parse_seed(meta["batch_seed"]) : std::nullopt;

  if (!std::getline(in, line)) throw ConfigError("cost table is missing its header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ConfigError("unexpected cost table header '" + line + "'");

  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 5 fields");
    }
    CostEntry e;
    std::size_t index = 0;
    const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), index);
    if (res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": invalid layer_index");
    }
    e.layer_index = index;
    e.layer_name = fields[1];
    e.activation = parse_activation(fields[2]);
    e.reference_value = parse_double(fields[3]);
    e.delta_value = parse_double(fields[4]);
    table.entries.push_back(std::move(e));
  }
  return table;
}

std::string to_csv(const CostTable& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

void save_table(const CostTable& table, const std::filesystem::path& path) {
  const std::string text = to_csv(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write table " + path.string());
  out << text;
}

CostTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingTableError("cannot open table " + path.string());
  return read_csv(in);
}

std::string table_filename(Metric metric, std::string_view device) {
  return std::string(to_string(metric)) + "_" + std::string(device) + ".csv";
}

}  // namespace actnas
