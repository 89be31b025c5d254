#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's Eigen paths: plain loops, cofactor expansion, full enumeration.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "actnas/activation.hpp"
#include "actnas/model.hpp"

namespace actnas::oracle {

using Grid = std::vector<std::vector<double>>;

inline double cofactor_det(const Grid& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  double det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    Grid minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<double> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != col) row.push_back(m[r][c]);
      minor.push_back(row);
    }
    det += (col % 2 == 0 ? 1.0 : -1.0) * m[0][col] * cofactor_det(minor);
  }
  return det;
}

inline Grid hamming_kernel(const std::vector<std::vector<int>>& codes) {
  const std::size_t n = codes.size(), units = codes.front().size();
  Grid k(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t hamming = 0;
      for (std::size_t u = 0; u < units; ++u) hamming += codes[i][u] != codes[j][u];
      k[i][j] = static_cast<double>(units - hamming);
    }
  return k;
}

// Direct-loop forward pass; returns per-sample codes (output > 0).
inline std::vector<std::vector<int>> forward_codes(const ModelSpec& model,
                                                   const std::vector<std::vector<std::vector<double>>>& weights,
                                                   const std::vector<std::vector<double>>& inputs) {
  std::vector<std::vector<int>> codes;
  for (const auto& sample : inputs) {
    std::vector<double> x = sample;
    std::vector<int> bits;
    for (std::size_t l = 0; l < model.size(); ++l) {
      const LayerSpec& layer = model.layers[l];
      const auto& w = weights[l];
      std::vector<double> y(static_cast<std::size_t>(layer.element_count()), 0.0);
      if (layer.kind == LayerKind::Dense) {
        for (std::size_t o = 0; o < y.size(); ++o)
          for (std::size_t i = 0; i < x.size(); ++i) y[o] += w[o][i] * x[i];
      } else {
        const auto ic = layer.in_shape[0], ih = layer.in_shape[1], iw = layer.in_shape[2];
        const auto oc = layer.out_shape[0], oh = layer.out_shape[1], ow = layer.out_shape[2];
        const int k = layer.kernel;
        for (std::int64_t o = 0; o < oc; ++o)
          for (std::int64_t oy = 0; oy < oh; ++oy)
            for (std::int64_t ox = 0; ox < ow; ++ox) {
              double acc = 0.0;
              for (std::int64_t c = 0; c < ic; ++c)
                for (int ky = 0; ky < k; ++ky)
                  for (int kx = 0; kx < k; ++kx) {
                    const auto iy = oy * layer.stride - layer.padding + ky;
                    const auto ix = ox * layer.stride - layer.padding + kx;
                    if (iy < 0 || iy >= ih || ix < 0 || ix >= iw) continue;
                    acc += w[o][(c * k + ky) * k + kx] * x[(c * ih + iy) * iw + ix];
                  }
              y[(o * oh + oy) * ow + ox] = acc;
            }
      }
      for (double& v : y) {
        v = eval_activation(layer.activation, v, model.leaky_slope);
        bits.push_back(v > 0.0 ? 1 : 0);
      }
      x = y;
    }
    codes.push_back(bits);
  }
  return codes;
}

struct BruteForceResult {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> assignment;
};

// Exhaustive enumeration in lexicographic order; sums in layer order from 0.
inline BruteForceResult brute_force_mckp(const Grid& obj, const Grid& bud, double budget) {
  const std::size_t layers = obj.size(), cols = obj.front().size();
  std::vector<int> idx(layers, 0);
  BruteForceResult best;
  while (true) {
    double o = 0.0, b = 0.0;
    for (std::size_t l = 0; l < layers; ++l) {
      o += obj[l][static_cast<std::size_t>(idx[l])];
      b += bud[l][static_cast<std::size_t>(idx[l])];
    }
    if (b <= budget && (!best.feasible || o < best.objective)) {
      best = {true, o, idx};
    }
    std::size_t l = layers;
    while (l > 0) {
      --l;
      if (++idx[l] < static_cast<int>(cols)) break;
      idx[l] = 0;
      if (l == 0) return best;
    }
    if (layers == 0) return best;
  }
}

inline Grid random_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Grid g(rows, std::vector<double>(cols));
  for (auto& r : g)
    for (auto& v : r) v = u(rng);
  return g;
}

}  // namespace actnas::oracle
