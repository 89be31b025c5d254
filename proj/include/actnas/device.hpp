#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actnas/cost_table.hpp"
#include "actnas/model.hpp"

namespace actnas {

using PerActivation = std::array<double, kNumActivations>;

/// Synthetic hardware target. Costs are linear in feature-map element
/// count: base_layer_cost is paid by every layer, per_activation_cost by the
/// activation it uses (both ns/element); memory_per_element is bytes/element.
struct DeviceProfile {
  std::string name;
  double base_layer_cost = 0.0;
  PerActivation per_activation_cost{};
  PerActivation memory_per_element{};
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;

  double activation_cost(ActivationKind kind) const { return per_activation_cost[column_index(kind)]; }
  double memory_cost(ActivationKind kind) const { return memory_per_element[column_index(kind)]; }

  bool operator==(const DeviceProfile&) const = default;
};

void validate(const DeviceProfile& profile);

struct MeasurementConfig {
  int runs = 50;
  /// Optional (channels, height, width) input override. Conv-layer element
  /// counts are rescaled by the spatial area ratio against the model input;
  /// dense layers are unchanged. Empty keeps the model's own input.
  Shape input_shape;
};

/// Mean over cfg.runs of the per-run latency, in ms. Each run multiplies the
/// deterministic cost by (1 + u) with u uniform in [-a, a], seeded from
/// (profile.seed, run index).
double simulate_latency(const ModelSpec& model, const DeviceProfile& profile,
                        const MeasurementConfig& cfg = {});

/// Activation memory in KB. No noise.
double simulate_memory(const ModelSpec& model, const DeviceProfile& profile);

/// Mean of (1 + u_r) over the runs; exactly 1 when noise_amplitude is 0.
double mean_noise_factor(const DeviceProfile& profile, int runs);

CostTable build_latency_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                              const DeviceProfile& profile, const MeasurementConfig& cfg = {},
                              unsigned threads = 1);
CostTable build_memory_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                             const DeviceProfile& profile, unsigned threads = 1);

// JSON profile files.
DeviceProfile parse_profile(std::string_view json_text);
std::string dump_profile(const DeviceProfile& profile);
DeviceProfile load_profile(const std::filesystem::path& path);
void save_profile(const DeviceProfile& profile, const std::filesystem::path& path);

/// Illustrative profiles "npu", "jetson-gpu", "cortex-a53", "cortex-a57".
/// Activation cost ordering on every profile is
/// ReLU < ReLU6 < LeakyReLU < Hardswish < SiLU.
std::vector<DeviceProfile> builtin_profiles();
DeviceProfile builtin_profile(std::string_view name);

}  // namespace actnas
