#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actnas/error.hpp"

namespace actnas {

/// The candidate activation functions. The enumerator order is the fixed
/// column order of every cost matrix.
enum class ActivationKind { ReLU = 0, SiLU, Hardswish, ReLU6, LeakyReLU };

inline constexpr std::size_t kNumActivations = 5;

inline constexpr std::array<ActivationKind, kNumActivations> kAllActivations = {
    ActivationKind::ReLU, ActivationKind::SiLU, ActivationKind::Hardswish,
    ActivationKind::ReLU6, ActivationKind::LeakyReLU};

inline constexpr double kDefaultLeakySlope = 0.1;

using Assignment = std::vector<ActivationKind>;

/// Canonical lower-case name ("relu", "silu", "hardswish", "relu6",
/// "leakyrelu").
std::string_view to_string(ActivationKind kind);

/// Inverse of to_string. Case-insensitive; throws ConfigError on unknown
/// names.
ActivationKind parse_activation(std::string_view name);

inline constexpr std::size_t column_index(ActivationKind kind) {
  return static_cast<std::size_t>(kind);
}

/// Sorts and de-duplicates a candidate set into the fixed column order.
std::vector<ActivationKind> canonical_order(std::span<const ActivationKind> kinds);

/// Throws ConfigError unless slope is finite and strictly inside (0, 1).
void validate_leaky_slope(double slope);

template <typename Scalar>
Scalar eval_activation_unchecked(ActivationKind kind, Scalar x,
                                 Scalar leaky_slope = Scalar(kDefaultLeakySlope)) {
  using std::exp;
  using std::max;
  using std::min;
  switch (kind) {
    case ActivationKind::ReLU:
      return max(Scalar(0), x);
    case ActivationKind::SiLU:
      return x / (Scalar(1) + exp(-x));
    case ActivationKind::Hardswish:
      return x * min(max(x + Scalar(3), Scalar(0)), Scalar(6)) / Scalar(6);
    case ActivationKind::ReLU6:
      return min(max(Scalar(0), x), Scalar(6));
    case ActivationKind::LeakyReLU:
      return x >= Scalar(0) ? x : leaky_slope * x;
  }
  return x;
}

/// Evaluates one activation function at x. Throws ConfigError for a
/// non-finite x.
template <typename Scalar>
Scalar eval_activation(ActivationKind kind, Scalar x,
                       Scalar leaky_slope = Scalar(kDefaultLeakySlope)) {
  if (!std::isfinite(x)) {
    throw ConfigError("eval_activation: non-finite input");
  }
  return eval_activation_unchecked(kind, x, leaky_slope);
}

}  // namespace actnas
