#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actnas/cost_table.hpp"
#include "actnas/search.hpp"

namespace actnas {

/// Rounds to `decimals` places, halves away from zero.
double round_half_away(double value, int decimals = 2);

/// Two-decimal fixed notation after round_half_away ("22.28", never "-0.00").
std::string format_fixed2(double value);

/// A labelled model with one objective value per device.
struct LabeledValues {
  std::string label;
  std::vector<double> values;
};

struct ReportRow {
  std::string label;
  bool baseline = false;
  std::vector<double> values;
  /// improvements[device][baseline]; empty for baseline rows.
  std::vector<std::vector<double>> improvements;
};

struct Report {
  std::string metric_label;
  std::vector<std::string> devices;
  std::vector<std::string> baselines;
  std::vector<ReportRow> rows;
};

/// Baselines are looked up by label among `models`; they are listed first
/// and carry no percentages. Every other model gets improvement_pct against
/// each baseline on each device. Unknown baseline labels throw ConfigError.
Report build_report(std::string metric_label, std::vector<std::string> devices,
                    const std::vector<LabeledValues>& models,
                    const std::vector<std::string>& baselines);

/// Label of the uniform-activation baseline model, e.g. "uniform_silu".
std::string baseline_label(ActivationKind kind);

/// Report over predicted totals (reference + summed deltas) on each device
/// matrix. Baselines are uniform assignments of the given kinds.
Report report_from_matrices(const std::vector<CostMatrix>& device_matrices,
                            const std::vector<std::pair<std::string, Assignment>>& proposals,
                            const std::vector<ActivationKind>& baselines);

std::string format_report_text(const Report& report);
std::string format_report_csv(const Report& report);

/// Rows "label,device,value" under that exact header. Devices and labels
/// keep first-appearance order; every label needs a value for every device.
std::vector<LabeledValues> read_values_csv(std::istream& in, std::vector<std::string>& devices);

}  // namespace actnas
