#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actnas/activation.hpp"

namespace actnas {

enum class LayerKind { Dense, Conv2d };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// Tensor dimensions: {channels, height, width} for conv2d, {width} for dense.
using Shape = std::vector<std::int64_t>;

std::int64_t element_count(const Shape& shape);

/// One activation slot: a dense or conv2d layer followed by its activation.
struct LayerSpec {
  int index = 0;
  std::string name;
  LayerKind kind = LayerKind::Dense;
  Shape in_shape;
  Shape out_shape;
  int kernel = 0;
  int stride = 1;
  int padding = 0;
  ActivationKind activation = ActivationKind::SiLU;

  std::int64_t element_count() const { return actnas::element_count(out_shape); }
  std::int64_t fan_in() const;

  bool operator==(const LayerSpec&) const = default;
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  double leaky_slope = kDefaultLeakySlope;

  std::size_t size() const { return layers.size(); }
  Assignment assignment() const;
  std::int64_t input_elements() const;
  std::int64_t total_elements() const;

  bool operator==(const ModelSpec&) const = default;
};

/// Checks index contiguity, per-layer shape arithmetic and layer chaining.
/// Throws ConfigError describing the first violation.
void validate(const ModelSpec& model);

/// True when both models have the same layers apart from activations.
bool same_topology(const ModelSpec& a, const ModelSpec& b);

/// Number of slots whose activation differs. Requires same_topology.
std::size_t hamming_distance(std::span<const ActivationKind> a,
                             std::span<const ActivationKind> b);

struct Replacement {
  std::size_t layer = 0;
  ActivationKind activation = ActivationKind::ReLU;
};

/// The (layer, activation) pairs of the single-replacement candidate space,
/// layer-major, activations in column order. Identity replacements are
/// included.
std::vector<Replacement> single_replacements(const ModelSpec& model,
                                             std::span<const ActivationKind> candidates);

ModelSpec apply_replacement(const ModelSpec& model, Replacement replacement);

/// Every model obtained by changing exactly one slot of `model` to one of
/// `candidates`: |layers| x |candidates| models.
std::vector<ModelSpec> enumerate_single_replacements(
    const ModelSpec& model, std::span<const ActivationKind> candidates);

ModelSpec apply_assignment(const ModelSpec& model, std::span<const ActivationKind> assignment);

ModelSpec uniform_model(const ModelSpec& model, ActivationKind kind);

// JSON model files.
ModelSpec parse_model(std::string_view json_text);
std::string dump_model(const ModelSpec& model);
ModelSpec load_model(const std::filesystem::path& path);
void save_model(const ModelSpec& model, const std::filesystem::path& path);

/// A small chain CNN with `slots` activation slots: a stride-2 stem
/// convolution on a 3x16x16 input, 4-channel 3x3 convolutions with two
/// further downsamplings, and a dense tail. Every slot starts as `activation`.
ModelSpec make_toy_model(std::size_t slots, ActivationKind activation = ActivationKind::SiLU);

}  // namespace actnas
