#include "actnas/nwot.hpp"

#include <cmath>
#include <random>
#include <string>

namespace actnas {

MiniBatch make_minibatch(const ModelSpec& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("mini-batch needs at least one sample");
  if (model.layers.empty()) throw ConfigError("mini-batch for an empty model");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MiniBatch batch;
  batch.seed = seed;
  batch.inputs.resize(samples, model.input_elements());
  for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) batch.inputs.data()[i] = normal(rng);
  return batch;
}

ModelWeights init_weights(const ModelSpec& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelWeights weights;
  weights.reserve(model.size());
  for (const LayerSpec& layer : model.layers) {
    const auto fan_in = layer.fan_in();
    const auto out = layer.out_shape[0];
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    Eigen::MatrixXd w(out, fan_in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = normal(rng);
    weights.push_back(std::move(w));
  }
  return weights;
}

namespace {

// Unfolds CHW samples into patch columns, sample after sample:
// (in_c*k*k) x (samples*Hout*Wout).
BatchMatrix im2col(const BatchMatrix& in, const LayerSpec& layer) {
  const auto in_c = layer.in_shape[0], in_h = layer.in_shape[1], in_w = layer.in_shape[2];
  const auto out_h = layer.out_shape[1], out_w = layer.out_shape[2];
  const auto spatial = out_h * out_w;
  const int k = layer.kernel;
  BatchMatrix cols = BatchMatrix::Zero(in_c * k * k, in.rows() * spatial);
  for (Eigen::Index n = 0; n < in.rows(); ++n) {
    const double* input = in.row(n).data();
    for (std::int64_t c = 0; c < in_c; ++c) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const auto row = (c * k + ky) * k + kx;
          for (std::int64_t oy = 0; oy < out_h; ++oy) {
            const auto iy = oy * layer.stride - layer.padding + ky;
            if (iy < 0 || iy >= in_h) continue;
            for (std::int64_t ox = 0; ox < out_w; ++ox) {
              const auto ix = ox * layer.stride - layer.padding + kx;
              if (ix < 0 || ix >= in_w) continue;
              cols(row, n * spatial + oy * out_w + ox) = input[(c * in_h + iy) * in_w + ix];
            }
          }
        }
      }
    }
  }
  return cols;
}

BatchMatrix linear_part(const LayerSpec& layer, const Eigen::MatrixXd& w, const BatchMatrix& in) {
  if (layer.kind == LayerKind::Dense) return in * w.transpose();
  const auto spatial = layer.out_shape[1] * layer.out_shape[2];
  const Eigen::MatrixXd y = w * im2col(in, layer);  // out_c x (samples*spatial)
  BatchMatrix out(in.rows(), layer.element_count());
  for (Eigen::Index n = 0; n < in.rows(); ++n) {
    // Channel-major flattening of sample n.
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out.row(n).data(), w.rows(), spatial) = y.middleCols(n * spatial, spatial);
  }
  return out;
}

void check_layer(const LayerSpec& layer, const Eigen::MatrixXd& w, const BatchMatrix& x, std::size_t l) {
  if (w.cols() != layer.fan_in() || w.rows() != layer.out_shape[0] ||
      x.cols() != element_count(layer.in_shape)) {
    throw ConfigError("weight/shape mismatch at layer " + std::to_string(l));
  }
}

// Activation of layer l applied to its linear output; records the codes.
BatchMatrix activate(const ModelSpec& model, std::size_t l, const BatchMatrix& pre, CodeMatrix& codes,
                     Eigen::Index offset) {
  const ActivationKind kind = model.layers[l].activation;
  const double slope = model.leaky_slope;
  BatchMatrix x = pre.unaryExpr([kind, slope](double v) { return eval_activation_unchecked(kind, v, slope); });
  if (!x.allFinite()) throw ConfigError("non-finite activation at layer " + std::to_string(l));
  codes.middleCols(offset, x.cols()) = (x.array() > 0.0).cast<std::uint8_t>();
  return x;
}

void check_batch(const ModelSpec& model, const ModelWeights& weights, const MiniBatch& batch) {
  if (weights.size() != model.size()) throw ConfigError("weights do not match model layers");
  if (batch.inputs.cols() != model.input_elements() || batch.inputs.rows() < 1) {
    throw ConfigError("mini-batch shape does not match model input (" +
                      std::to_string(batch.inputs.cols()) + " vs " +
                      std::to_string(model.input_elements()) + " features)");
  }
  if (!batch.inputs.allFinite()) throw ConfigError("mini-batch contains non-finite entries");
}

// Layers [from, end) starting from x, the input of layer `from`.
void run_layers(const ModelSpec& model, const ModelWeights& weights, std::size_t from, BatchMatrix x,
                CodeMatrix& codes, Eigen::Index offset) {
  for (std::size_t l = from; l < model.size(); ++l) {
    const LayerSpec& layer = model.layers[l];
    check_layer(layer, weights[l], x, l);
    x = activate(model, l, linear_part(layer, weights[l], x), codes, offset);
    offset += x.cols();
  }
}

}  // namespace

CodeMatrix forward_with_codes(const ModelSpec& model, const ModelWeights& weights,
                              const MiniBatch& batch) {
  check_batch(model, weights, batch);
  CodeMatrix codes(batch.inputs.rows(), model.total_elements());
  run_layers(model, weights, 0, batch.inputs, codes, 0);
  return codes;
}

ReferenceForward::ReferenceForward(const ModelSpec& reference, const ModelWeights& weights,
                                   const MiniBatch& batch)
    : reference_(reference), weights_(weights) {
  check_batch(reference, weights, batch);
  codes_.resize(batch.inputs.rows(), reference.total_elements());
  BatchMatrix x = batch.inputs;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < reference.size(); ++l) {
    const LayerSpec& layer = reference.layers[l];
    check_layer(layer, weights[l], x, l);
    offsets_.push_back(offset);
    pre_.push_back(linear_part(layer, weights[l], x));
    x = activate(reference, l, pre_.back(), codes_, offset);
    offset += x.cols();
  }
  // prefix_kernel_[l] covers the units of layers [0, l).
  prefix_kernel_.push_back(Eigen::MatrixXd::Zero(codes_.rows(), codes_.rows()));
  for (std::size_t l = 0; l + 1 < reference.size(); ++l) {
    const Eigen::Index width = offsets_[l + 1] - offsets_[l];
    prefix_kernel_.push_back(prefix_kernel_.back() +
                             hamming_kernel(codes_.middleCols(offsets_[l], width).cast<double>()));
  }
}

NwotScore ReferenceForward::score(const ModelSpec& candidate) const {
  const std::size_t first = first_change(candidate);
  const CodeMatrix codes = this->codes(candidate);
  if (first == candidate.size()) return nwot_score(codes);
  const Eigen::Index offset = offsets_[first];
  return kernel_score(prefix_kernel_[first] +
                      hamming_kernel(codes.rightCols(codes.cols() - offset).cast<double>()));
}

std::size_t ReferenceForward::first_change(const ModelSpec& candidate) const {
  if (!same_topology(reference_, candidate) || candidate.leaky_slope != reference_.leaky_slope) {
    throw ConfigError("candidate topology differs from the cached reference");
  }
  std::size_t first = 0;
  while (first < candidate.size() &&
         candidate.layers[first].activation == reference_.layers[first].activation) {
    ++first;
  }
  return first;
}

CodeMatrix ReferenceForward::codes(const ModelSpec& candidate) const {
  const std::size_t first = first_change(candidate);
  CodeMatrix codes = codes_;
  if (first == candidate.size()) return codes;
  const BatchMatrix x = activate(candidate, first, pre_[first], codes, offsets_[first]);
  run_layers(candidate, weights_, first + 1, x, codes,
             offsets_[first] + static_cast<Eigen::Index>(x.cols()));
  return codes;
}

NwotScore nwot_score(const CodeMatrix& codes) {
  if (codes.rows() < 1) throw ConfigError("nwot_score needs at least one sample");
  return kernel_score(hamming_kernel(codes.cast<double>()));
}

NwotScore kernel_score(const Eigen::MatrixXd& kernel) {
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kernel);
  if (!lu.isInvertible()) return {};

  const auto diag = lu.matrixLU().diagonal();
  double sign = lu.permutationP().determinant() * lu.permutationQ().determinant();
  double log_abs = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] < 0.0) sign = -sign;
    log_abs += std::log(std::abs(diag[i]));
  }
  if (sign <= 0.0 || !std::isfinite(log_abs)) return {};
  return {log_abs, false};
}

NwotScore score_model(const ModelSpec& model, const ModelWeights& weights, const MiniBatch& batch) {
  return nwot_score(forward_with_codes(model, weights, batch));
}

NwotScore score_model(const ModelSpec& model, const NwotConfig& config) {
  return score_model(model, init_weights(model, config.weight_seed),
                     make_minibatch(model, config.batch_size, config.batch_seed));
}

double score_difference(const NwotScore& candidate, const NwotScore& reference) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (candidate.degenerate) return -kInf;
  if (reference.degenerate) return kInf;
  return candidate.value - reference.value;
}

double accuracy_delta(const ModelSpec& reference, const ModelSpec& candidate,
                      const ModelWeights& weights, const MiniBatch& batch) {
  if (!same_topology(reference, candidate)) {
    throw ConfigError("accuracy_delta: candidate topology differs from reference");
  }
  if (reference.assignment() == candidate.assignment()) return 0.0;
  return score_difference(score_model(candidate, weights, batch),
                          score_model(reference, weights, batch));
}

double accuracy_delta(const ModelSpec& reference, const ModelSpec& candidate,
                      const NwotConfig& config) {
  return accuracy_delta(reference, candidate, init_weights(reference, config.weight_seed),
                        make_minibatch(reference, config.batch_size, config.batch_seed));
}

}  // namespace actnas
