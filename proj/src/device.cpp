#include "actnas/device.hpp"
#include "actnas/error.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace actnas {

using nlohmann::json;

void validate(const DeviceProfile& p) {
  const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (p.name.empty() || p.name.find_first_of(" \t\n,=") != std::string::npos) {
    throw ConfigError("profile name must be non-empty without whitespace, commas or '='");
  }
  if (!ok(p.base_layer_cost)) throw ConfigError("profile '" + p.name + "': negative base_layer_cost");
  for (std::size_t i = 0; i < kNumActivations; ++i) {
    if (!ok(p.per_activation_cost[i]) || !ok(p.memory_per_element[i])) {
      throw ConfigError("profile '" + p.name + "': coefficients must be finite and non-negative");
    }
  }
  if (!std::isfinite(p.noise_amplitude) || p.noise_amplitude < 0.0 || p.noise_amplitude >= 1.0) {
    throw ConfigError("profile '" + p.name + "': noise_amplitude must be in [0, 1)");
  }
}

namespace {

double spatial_scale(const ModelSpec& model, const MeasurementConfig& cfg) {
  if (cfg.input_shape.empty()) return 1.0;
  const Shape& native = model.layers.front().in_shape;
  if (cfg.input_shape.size() != 3 || native.size() != 3) {
    throw ConfigError("input_shape override needs a (channels, height, width) conv input");
  }
  return static_cast<double>(cfg.input_shape[1] * cfg.input_shape[2]) /
         static_cast<double>(native[1] * native[2]);
}

}  // namespace

double mean_noise_factor(const DeviceProfile& profile, int runs) {
  if (runs < 1) throw ConfigError("measurement runs must be >= 1");
  if (profile.noise_amplitude == 0.0) return 1.0;
  double sum = 0.0;
  for (int run = 0; run < runs; ++run) {
    std::seed_seq seq{static_cast<std::uint32_t>(profile.seed),
                      static_cast<std::uint32_t>(profile.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    sum += 1.0 + profile.noise_amplitude * (2.0 * unit - 1.0);
  }
  return sum / runs;
}

namespace {

// The noise factor does not depend on the model, so tables compute it once.
double latency_ms(const ModelSpec& model, const DeviceProfile& profile, double scale, double noise) {
  double ns = 0.0;
  for (const LayerSpec& layer : model.layers) {
    const double elements = static_cast<double>(layer.element_count()) *
                            (layer.kind == LayerKind::Conv2d ? scale : 1.0);
    ns += elements * (profile.base_layer_cost + profile.activation_cost(layer.activation));
  }
  const double ms = ns * noise * 1e-6;
  if (!std::isfinite(ms)) throw Error("simulated latency of '" + model.name + "' is not finite");
  return ms;
}

}  // namespace

double simulate_latency(const ModelSpec& model, const DeviceProfile& profile,
                        const MeasurementConfig& cfg) {
  validate(model);
  validate(profile);
  return latency_ms(model, profile, spatial_scale(model, cfg), mean_noise_factor(profile, cfg.runs));
}

double simulate_memory(const ModelSpec& model, const DeviceProfile& profile) {
  validate(model);
  validate(profile);
  double bytes = 0.0;
  for (const LayerSpec& layer : model.layers) {
    bytes += static_cast<double>(layer.element_count()) * profile.memory_cost(layer.activation);
  }
  if (!std::isfinite(bytes)) throw Error("simulated memory of '" + model.name + "' is not finite");
  return bytes / 1024.0;
}

CostTable build_latency_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                              const DeviceProfile& profile, const MeasurementConfig& cfg,
                              unsigned threads) {
  validate(model);
  validate(profile);
  const double scale = spatial_scale(model, cfg);
  const double noise = mean_noise_factor(profile, cfg.runs);
  const double reference = latency_ms(model, profile, scale, noise);
  return build_table(
      model, candidates, Metric::Latency, profile.name, reference,
      [&](const ModelSpec& c) { return latency_ms(c, profile, scale, noise) - reference; }, threads);
}

CostTable build_memory_table(const ModelSpec& model, std::span<const ActivationKind> candidates,
                             const DeviceProfile& profile, unsigned threads) {
  const double reference = simulate_memory(model, profile);
  return build_table(
      model, candidates, Metric::Memory, profile.name, reference,
      [&](const ModelSpec& c) { return simulate_memory(c, profile) - reference; }, threads);
}

// --- JSON -------------------------------------------------------------------

namespace {

json per_activation_to_json(const PerActivation& values) {
  json j = json::object();
  for (ActivationKind kind : kAllActivations) {
    j[std::string(to_string(kind))] = values[column_index(kind)];
  }
  return j;
}

PerActivation per_activation_from_json(const json& j, std::string_view field) {
  PerActivation out{};
  for (ActivationKind kind : kAllActivations) {
    const std::string key(to_string(kind));
    if (!j.contains(key)) {
      throw ConfigError("profile field '" + std::string(field) + "' is missing '" + key + "'");
    }
    out[column_index(kind)] = j.at(key).get<double>();
  }
  for (const auto& [key, value] : j.items()) parse_activation(key);
  return out;
}

}  // namespace

DeviceProfile parse_profile(std::string_view json_text) {
  DeviceProfile p;
  try {
    const json j = json::parse(json_text);
    p.name = j.at("name").get<std::string>();
    p.base_layer_cost = j.at("base_layer_cost").get<double>();
    p.per_activation_cost = per_activation_from_json(j.at("per_activation_cost"), "per_activation_cost");
    p.memory_per_element = per_activation_from_json(j.at("memory_per_element"), "memory_per_element");
    p.noise_amplitude = j.value("noise_amplitude", 0.0);
    p.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed profile file: ") + e.what());
  }
  validate(p);
  return p;
}

std::string dump_profile(const DeviceProfile& p) {
  json j = {{"name", p.name},
            {"base_layer_cost", p.base_layer_cost},
            {"per_activation_cost", per_activation_to_json(p.per_activation_cost)},
            {"memory_per_element", per_activation_to_json(p.memory_per_element)},
            {"noise_amplitude", p.noise_amplitude},
            {"seed", p.seed}};
  return j.dump(2) + "\n";
}

DeviceProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_profile(buffer.str());
}

void save_profile(const DeviceProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write profile file " + path.string());
  out << dump_profile(profile);
}

// Column order: relu, silu, hardswish, relu6, leakyrelu.
std::vector<DeviceProfile> builtin_profiles() {
  return {
      {"npu", 0.80, {0.10, 0.55, 0.30, 0.12, 0.15}, {1.50, 3.10, 1.00, 1.50, 1.75}, 0.02, 11},
      {"jetson-gpu", 0.05, {0.010, 0.022, 0.018, 0.011, 0.012}, {4.0, 6.0, 4.5, 4.0, 4.0}, 0.05, 12},
      {"cortex-a53", 2.00, {0.20, 0.80, 0.45, 0.24, 0.28}, {4.0, 6.0, 4.5, 4.0, 4.0}, 0.03, 13},
      {"cortex-a57", 1.40, {0.15, 0.60, 0.34, 0.18, 0.21}, {4.0, 6.0, 4.5, 4.0, 4.0}, 0.03, 14},
  };
}

DeviceProfile builtin_profile(std::string_view name) {
  for (DeviceProfile& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown built-in profile '" + std::string(name) + "'");
}

}  // namespace actnas
