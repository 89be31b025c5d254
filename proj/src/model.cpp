#include "actnas/model.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace actnas {

using nlohmann::json;

std::string_view to_string(LayerKind kind) {
  return kind == LayerKind::Conv2d ? "conv2d" : "dense";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "conv2d") return LayerKind::Conv2d;
  if (name == "dense") return LayerKind::Dense;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

std::int64_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

std::int64_t LayerSpec::fan_in() const {
  if (kind == LayerKind::Conv2d) {
    return in_shape.empty() ? 0 : in_shape[0] * kernel * kernel;
  }
  return actnas::element_count(in_shape);
}

Assignment ModelSpec::assignment() const {
  Assignment out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(layer.activation);
  return out;
}

std::int64_t ModelSpec::input_elements() const {
  return layers.empty() ? 0 : actnas::element_count(layers.front().in_shape);
}

std::int64_t ModelSpec::total_elements() const {
  std::int64_t total = 0;
  for (const auto& layer : layers) total += layer.element_count();
  return total;
}

namespace {

std::string layer_context(const LayerSpec& layer) {
  return "layer " + std::to_string(layer.index) + " ('" + layer.name + "')";
}

void validate_layer(const LayerSpec& layer) {
  const auto positive = [](const Shape& s) {
    return std::all_of(s.begin(), s.end(), [](std::int64_t d) { return d >= 1; });
  };
  if (layer.name.empty() || layer.name.find_first_of(",\n\r\"") != std::string::npos) {
    throw ConfigError(layer_context(layer) + ": name must be non-empty without commas, quotes or newlines");
  }
  if (!positive(layer.in_shape) || !positive(layer.out_shape)) {
    throw ConfigError(layer_context(layer) + ": shape dimensions must be >= 1");
  }
  if (layer.kind == LayerKind::Dense) {
    if (layer.in_shape.size() != 1 || layer.out_shape.size() != 1) {
      throw ConfigError(layer_context(layer) + ": dense shapes must be one-dimensional");
    }
    return;
  }
  if (layer.in_shape.size() != 3 || layer.out_shape.size() != 3) {
    throw ConfigError(layer_context(layer) + ": conv2d shapes must be (channels, height, width)");
  }
  if (layer.kernel < 1 || layer.stride < 1 || layer.padding < 0) {
    throw ConfigError(layer_context(layer) + ": kernel/stride must be >= 1 and padding >= 0");
  }
  for (int axis = 1; axis <= 2; ++axis) {
    const std::int64_t span = layer.in_shape[axis] + 2 * layer.padding - layer.kernel;
    if (span < 0) {
      throw ConfigError(layer_context(layer) + ": kernel larger than padded input");
    }
    const std::int64_t expected = span / layer.stride + 1;
    if (layer.out_shape[axis] != expected) {
      throw ConfigError(layer_context(layer) + ": output extent " +
                        std::to_string(layer.out_shape[axis]) + " does not match expected " +
                        std::to_string(expected));
    }
  }
}

}  // namespace

void validate(const ModelSpec& model) {
  if (model.layers.empty()) throw ConfigError("model has no layers");
  validate_leaky_slope(model.leaky_slope);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    if (layer.index != static_cast<int>(i)) {
      throw ConfigError("layer indices must be contiguous from 0; found " +
                        std::to_string(layer.index) + " at position " + std::to_string(i));
    }
    validate_layer(layer);
    if (i == 0) continue;
    const LayerSpec& prev = model.layers[i - 1];
    const bool conv_chain = prev.kind == LayerKind::Conv2d && layer.kind == LayerKind::Conv2d;
    if (conv_chain ? prev.out_shape != layer.in_shape
                   : prev.element_count() != element_count(layer.in_shape)) {
      throw ConfigError(layer_context(layer) + ": input does not match output of previous layer");
    }
  }
}

bool same_topology(const ModelSpec& a, const ModelSpec& b) {
  if (a.layers.size() != b.layers.size() || a.leaky_slope != b.leaky_slope) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    LayerSpec lhs = a.layers[i];
    lhs.activation = b.layers[i].activation;
    if (!(lhs == b.layers[i])) return false;
  }
  return true;
}

std::size_t hamming_distance(std::span<const ActivationKind> a,
                             std::span<const ActivationKind> b) {
  if (a.size() != b.size()) throw ConfigError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

std::vector<Replacement> single_replacements(const ModelSpec& model,
                                             std::span<const ActivationKind> candidates) {
  if (model.layers.empty()) throw ConfigError("cannot enumerate replacements of an empty model");
  const auto columns = canonical_order(candidates);
  if (columns.empty()) throw ConfigError("candidate activation set is empty");
  std::vector<Replacement> out;
  out.reserve(model.size() * columns.size());
  for (std::size_t layer = 0; layer < model.size(); ++layer) {
    for (ActivationKind kind : columns) out.push_back({layer, kind});
  }
  return out;
}

ModelSpec apply_replacement(const ModelSpec& model, Replacement replacement) {
  if (replacement.layer >= model.size()) throw ConfigError("replacement layer out of range");
  ModelSpec out = model;
  out.layers[replacement.layer].activation = replacement.activation;
  return out;
}

std::vector<ModelSpec> enumerate_single_replacements(
    const ModelSpec& model, std::span<const ActivationKind> candidates) {
  std::vector<ModelSpec> out;
  for (const Replacement& r : single_replacements(model, candidates)) {
    out.push_back(apply_replacement(model, r));
  }
  return out;
}

ModelSpec apply_assignment(const ModelSpec& model, std::span<const ActivationKind> assignment) {
  if (assignment.size() != model.size()) {
    throw ConfigError("assignment has " + std::to_string(assignment.size()) +
                      " slots but model has " + std::to_string(model.size()) + " layers");
  }
  ModelSpec out = model;
  for (std::size_t i = 0; i < assignment.size(); ++i) out.layers[i].activation = assignment[i];
  return out;
}

ModelSpec uniform_model(const ModelSpec& model, ActivationKind kind) {
  return apply_assignment(model, Assignment(model.size(), kind));
}

// --- JSON -------------------------------------------------------------------

namespace {

json layer_to_json(const LayerSpec& layer) {
  return json{{"index", layer.index},
              {"name", layer.name},
              {"kind", to_string(layer.kind)},
              {"in_shape", layer.in_shape},
              {"out_shape", layer.out_shape},
              {"kernel", layer.kernel},
              {"stride", layer.stride},
              {"padding", layer.padding},
              {"activation", to_string(layer.activation)}};
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec layer;
  layer.index = j.at("index").get<int>();
  layer.name = j.at("name").get<std::string>();
  layer.kind = parse_layer_kind(j.at("kind").get<std::string>());
  layer.in_shape = j.at("in_shape").get<Shape>();
  layer.out_shape = j.at("out_shape").get<Shape>();
  layer.kernel = j.value("kernel", 0);
  layer.stride = j.value("stride", 1);
  layer.padding = j.value("padding", 0);
  layer.activation = parse_activation(j.at("activation").get<std::string>());
  return layer;
}

}  // namespace

ModelSpec parse_model(std::string_view json_text) {
  ModelSpec model;
  try {
    const json j = json::parse(json_text);
    model.name = j.value("name", std::string{});
    model.leaky_slope = j.value("leaky_slope", kDefaultLeakySlope);
    for (const json& lj : j.at("layers")) model.layers.push_back(layer_from_json(lj));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
  validate(model);
  return model;
}

std::string dump_model(const ModelSpec& model) {
  json layers = json::array();
  for (const auto& layer : model.layers) layers.push_back(layer_to_json(layer));
  json j = {{"name", model.name}, {"layers", layers}, {"leaky_slope", model.leaky_slope}};
  return j.dump(2) + "\n";
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

void save_model(const ModelSpec& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file " + path.string());
  out << dump_model(model);
}

ModelSpec make_toy_model(std::size_t slots, ActivationKind activation) {
  if (slots == 0) throw ConfigError("make_toy_model: slots must be >= 1");
  constexpr std::int64_t kChannels = 4;
  const std::size_t dense_tail = slots >= 3 ? 2 : slots - 1;
  const std::size_t convs = slots - dense_tail;

  ModelSpec model;
  model.name = "toy" + std::to_string(slots);
  Shape shape = {3, 16, 16};
  for (std::size_t i = 0; i < convs; ++i) {
    LayerSpec layer;
    layer.index = static_cast<int>(i);
    layer.name = "conv" + std::to_string(i);
    layer.kind = LayerKind::Conv2d;
    layer.kernel = 3;
    layer.padding = 1;
    const bool downsample = i == 0 || (convs >= 3 && (i == convs / 3 || i == 2 * convs / 3));
    layer.stride = downsample && shape[1] > 1 ? 2 : 1;
    layer.in_shape = shape;
    const auto extent = [&](std::int64_t n) { return (n + 2 - 3) / layer.stride + 1; };
    shape = {kChannels, extent(shape[1]), extent(shape[2])};
    layer.out_shape = shape;
    layer.activation = activation;
    model.layers.push_back(layer);
  }
  std::int64_t width = element_count(shape);
  const std::int64_t tail_widths[] = {16, 10};
  for (std::size_t t = 0; t < dense_tail; ++t) {
    LayerSpec layer;
    layer.index = static_cast<int>(convs + t);
    layer.name = "fc" + std::to_string(t);
    layer.kind = LayerKind::Dense;
    layer.in_shape = {width};
    width = tail_widths[t + (dense_tail == 1 ? 1 : 0)];
    layer.out_shape = {width};
    layer.activation = activation;
    model.layers.push_back(layer);
  }
  validate(model);
  return model;
}

}  // namespace actnas
