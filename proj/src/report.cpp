#include "actnas/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

namespace actnas {

double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::string format_fixed2(double value) {
  if (!std::isfinite(value)) return format_double(value);
  double rounded = round_half_away(value, 2);
  if (rounded == 0.0) rounded = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", rounded);
  return buf;
}

Report build_report(std::string metric_label, std::vector<std::string> devices,
                    const std::vector<LabeledValues>& models,
                    const std::vector<std::string>& baselines) {
  Report report;
  report.metric_label = std::move(metric_label);
  report.devices = std::move(devices);
  report.baselines = baselines;
  for (const LabeledValues& m : models) {
    if (m.values.size() != report.devices.size()) {
      throw ConfigError("model '" + m.label + "' has " + std::to_string(m.values.size()) +
                        " values for " + std::to_string(report.devices.size()) + " devices");
    }
  }
  const auto find = [&](const std::string& label) -> const LabeledValues& {
    const auto it = std::find_if(models.begin(), models.end(),
                                 [&](const LabeledValues& m) { return m.label == label; });
    if (it == models.end()) throw ConfigError("unknown baseline '" + label + "'");
    return *it;
  };
  std::vector<const LabeledValues*> base;
  for (const std::string& label : baselines) base.push_back(&find(label));

  for (const LabeledValues* b : base) report.rows.push_back({b->label, true, b->values, {}});
  for (const LabeledValues& m : models) {
    if (std::find(baselines.begin(), baselines.end(), m.label) != baselines.end()) continue;
    ReportRow row{m.label, false, m.values, {}};
    for (std::size_t d = 0; d < report.devices.size(); ++d) {
      std::vector<double> pct;
      for (const LabeledValues* b : base) pct.push_back(improvement_pct(b->values[d], m.values[d]));
      row.improvements.push_back(std::move(pct));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string baseline_label(ActivationKind kind) {
  return "uniform_" + std::string(to_string(kind));
}

Report report_from_matrices(const std::vector<CostMatrix>& device_matrices,
                            const std::vector<std::pair<std::string, Assignment>>& proposals,
                            const std::vector<ActivationKind>& baselines) {
  if (device_matrices.empty()) throw ConfigError("report needs at least one device table");
  const Metric metric = device_matrices.front().metric;
  std::vector<std::string> devices;
  for (const CostMatrix& m : device_matrices) {
    if (m.metric != metric) throw ConfigError("report tables mix metrics");
    devices.push_back(m.device);
  }
  const auto layers = static_cast<std::size_t>(device_matrices.front().layers());
  std::vector<LabeledValues> models;
  std::vector<std::string> baseline_labels;
  const auto add = [&](const std::string& label, const Assignment& assignment) {
    LabeledValues lv{label, {}};
    for (const CostMatrix& m : device_matrices) lv.values.push_back(predicted_total(m, assignment));
    models.push_back(std::move(lv));
  };
  for (ActivationKind kind : baselines) {
    baseline_labels.push_back(baseline_label(kind));
    add(baseline_labels.back(), Assignment(layers, kind));
  }
  for (const auto& [label, assignment] : proposals) add(label, assignment);
  return build_report(std::string(to_string(metric)) + " (" + std::string(metric_unit(metric)) + ")",
                      devices, models, baseline_labels);
}

std::string format_report_text(const Report& report) {
  std::vector<std::string> header = {"model"};
  for (const std::string& device : report.devices) {
    header.push_back(device + " " + report.metric_label);
    for (const std::string& b : report.baselines) header.push_back("vs " + b);
  }
  std::vector<std::vector<std::string>> cells = {header};
  for (const ReportRow& row : report.rows) {
    std::vector<std::string> line = {row.label};
    for (std::size_t d = 0; d < report.devices.size(); ++d) {
      line.push_back(format_fixed2(row.values[d]));
      for (std::size_t b = 0; b < report.baselines.size(); ++b) {
        line.push_back(row.baseline ? "-" : format_fixed2(row.improvements[d][b]) + "%");
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const std::string& cell = cells[r][c];
      const std::string pad(width[c] - cell.size(), ' ');
      out << (c == 0 ? cell + pad : " | " + pad + cell);
    }
    out << "\n";
    if (r == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < width.size(); ++c) total += width[c] + 3;
      out << std::string(total, '-') << "\n";
    }
  }
  return out.str();
}

std::string format_report_csv(const Report& report) {
  std::ostringstream out;
  out << "model";
  for (const std::string& device : report.devices) {
    out << ',' << device;
    for (const std::string& b : report.baselines) out << ',' << device << "_vs_" << b << "_pct";
  }
  out << "\n";
  for (const ReportRow& row : report.rows) {
    out << row.label;
    for (std::size_t d = 0; d < report.devices.size(); ++d) {
      out << ',' << format_fixed2(row.values[d]);
      for (std::size_t b = 0; b < report.baselines.size(); ++b) {
        out << ',' << (row.baseline ? std::string() : format_fixed2(row.improvements[d][b]));
      }
    }
    out << "\n";
  }
  return out.str();
}

std::vector<LabeledValues> read_values_csv(std::istream& in, std::vector<std::string>& devices) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("values file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "label,device,value") throw ConfigError("values file header must be 'label,device,value'");
  devices.clear();
  std::vector<std::string> labels;
  std::map<std::pair<std::string, std::string>, double> cells;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(','), c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ConfigError("malformed values line '" + line + "'");
    }
    const std::string label = line.substr(0, c1), device = line.substr(c1 + 1, c2 - c1 - 1);
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    if (std::find(devices.begin(), devices.end(), device) == devices.end()) devices.push_back(device);
    cells[{label, device}] = parse_double(std::string_view(line).substr(c2 + 1));
  }
  std::vector<LabeledValues> out;
  for (const std::string& label : labels) {
    LabeledValues lv{label, {}};
    for (const std::string& device : devices) {
      const auto it = cells.find({label, device});
      if (it == cells.end()) throw ConfigError("values file lacks " + label + " on " + device);
      lv.values.push_back(it->second);
    }
    out.push_back(std::move(lv));
  }
  return out;
}

}  // namespace actnas
