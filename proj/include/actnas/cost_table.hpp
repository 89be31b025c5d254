#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "actnas/model.hpp"
#include "actnas/nwot.hpp"

namespace actnas {

enum class Metric { Latency, Accuracy, Memory };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

/// Units of the reference/delta values: ms, NWOT log-det units, KB.
std::string_view metric_unit(Metric metric);

struct CostEntry {
  std::size_t layer_index = 0;
  std::string layer_name;
  ActivationKind activation = ActivationKind::ReLU;
  double reference_value = 0.0;
  double delta_value = 0.0;

  bool operator==(const CostEntry&) const = default;
};

/// Single-replacement benchmark table for one metric on one device.
/// Accuracy deltas are positive-is-better; latency and memory deltas are
/// positive-is-worse.
struct CostTable {
  Metric metric = Metric::Latency;
  std::string device;
  double reference_total = 0.0;
  std::optional<std::uint64_t> weight_seed;
  std::optional<std::uint64_t> batch_seed;
  std::vector<CostEntry> entries;

  bool operator==(const CostTable&) const = default;
};

/// Layers x activations delta matrix. Columns are a subset of
/// kAllActivations kept in that order.
struct CostMatrix {
  Metric metric = Metric::Latency;
  std::string device;
  double reference_total = 0.0;
  std::vector<std::string> layer_names;
  std::vector<ActivationKind> columns;
  Eigen::MatrixXd values;

  Eigen::Index layers() const { return values.rows(); }
  /// Column of `kind`; throws ConfigError when the matrix has no such column.
  Eigen::Index column(ActivationKind kind) const;
  bool has_column(ActivationKind kind) const;
  double delta(std::size_t layer, ActivationKind kind) const;

  bool operator==(const CostMatrix& other) const;
};

/// Delta of one candidate model relative to the reference.
using DeltaEstimator = std::function<double(const ModelSpec& candidate)>;

/// Builds a table from an estimator. Identity replacements get delta 0
/// without calling the estimator. Candidates are evaluated on `threads`
/// worker threads; the result does not depend on the thread count. An
/// estimator exception becomes an EstimatorError naming (layer, activation).
CostTable build_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                      Metric metric, std::string device, double reference_total,
                      const DeltaEstimator& estimator, unsigned threads = 1);

/// Accuracy table scored with NWOT. All candidates share the reference
/// model's weights and mini-batch.
CostTable build_accuracy_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                               const NwotConfig& config, unsigned threads = 1);

CostMatrix to_matrix(const CostTable& table);
CostTable to_table(const CostMatrix& matrix);

/// reference_total + sum over layers of values[l][assignment_l].
double predicted_total(const CostMatrix& matrix, std::span<const ActivationKind> assignment);

/// (reference - value) / reference * 100. Throws ConfigError unless
/// reference > 0.
double improvement_pct(double reference_value, double new_value);

// CSV serialization.
void write_csv(const CostTable& table, std::ostream& out);
CostTable read_csv(std::istream& in);
std::string to_csv(const CostTable& table);
void save_table(const CostTable& table, const std::filesystem::path& path);
CostTable load_table(const std::filesystem::path& path);

/// "<metric>_<device>.csv"
std::string table_filename(Metric metric, std::string_view device);

/// Shortest round-trip decimal representation ("inf"/"-inf" for infinities).
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace actnas
