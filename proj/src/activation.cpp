#include "actnas/activation.hpp"

#include <algorithm>
#include <cctype>

namespace actnas {

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::SiLU:
      return "silu";
    case ActivationKind::Hardswish:
      return "hardswish";
    case ActivationKind::ReLU6:
      return "relu6";
    case ActivationKind::LeakyReLU:
      return "leakyrelu";
  }
  return "unknown";
}

ActivationKind parse_activation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ActivationKind kind : kAllActivations) {
    if (to_string(kind) == lower) return kind;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::vector<ActivationKind> canonical_order(std::span<const ActivationKind> kinds) {
  std::vector<ActivationKind> out(kinds.begin(), kinds.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate_leaky_slope(double slope) {
  if (!std::isfinite(slope) || slope <= 0.0 || slope >= 1.0) {
    throw ConfigError("leaky_slope must be finite and in (0, 1)");
  }
}

}  // namespace actnas
