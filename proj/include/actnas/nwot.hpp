#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "actnas/model.hpp"

namespace actnas {

/// Samples x flattened features, one sample per row.
using BatchMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary activation codes: samples x activation units, entries 0 or 1.
using CodeMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MiniBatch {
  BatchMatrix inputs;
  std::uint64_t seed = 0;
};

inline constexpr int kDefaultBatchSize = 16;

/// Standard-normal mini-batch shaped for the model input. Same seed gives
/// bit-identical inputs.
MiniBatch make_minibatch(const ModelSpec& model, int samples, std::uint64_t seed);

/// Per-layer weight matrices: (out_features x in_features) for dense,
/// (out_channels x in_channels*k*k) for conv2d. No biases.
using ModelWeights = std::vector<Eigen::MatrixXd>;

/// Gaussian weights with standard deviation 1/sqrt(fan_in). Depends only on
/// the topology, never on the activation assignment.
ModelWeights init_weights(const ModelSpec& model, std::uint64_t seed);

/// Runs the batch through the model and records, for every scalar
/// activation output, whether it is strictly positive.
CodeMatrix forward_with_codes(const ModelSpec& model, const ModelWeights& weights,
                              const MiniBatch& batch);

/// K[i][j] = N_A - hamming(row_i, row_j).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> hamming_kernel(
    const Eigen::MatrixBase<Derived>& codes) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  // With s = 2c - 1, s_i . s_j = N_A - 2 hamming, so K = (N_A + S S^T) / 2.
  const Mat s = codes.template cast<Scalar>().array() * Scalar(2) - Scalar(1);
  Mat k = Mat::Constant(s.rows(), s.rows(), static_cast<Scalar>(s.cols()));
  k.template selfadjointView<Eigen::Lower>().rankUpdate(s);
  k.template triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k / Scalar(2);
}

struct NwotScore {
  double value = -std::numeric_limits<double>::infinity();
  bool degenerate = true;
};

/// log|det K| of the Hamming kernel via full-pivot LU. Singular kernels and
/// non-positive determinants are flagged degenerate with value -inf.
NwotScore nwot_score(const CodeMatrix& codes);
NwotScore kernel_score(const Eigen::MatrixXd& kernel);

/// Forward pass of a reference model that keeps every layer's linear output.
/// A candidate with the same topology reruns only the layers from its first
/// changed activation on; the codes equal forward_with_codes(candidate).
class ReferenceForward {
 public:
  ReferenceForward(const ModelSpec& reference, const ModelWeights& weights, const MiniBatch& batch);

  const CodeMatrix& reference_codes() const { return codes_; }
  CodeMatrix codes(const ModelSpec& candidate) const;
  /// Equals nwot_score(codes(candidate)); reuses the kernel of the unchanged prefix.
  NwotScore score(const ModelSpec& candidate) const;

 private:
  std::size_t first_change(const ModelSpec& candidate) const;

  ModelSpec reference_;
  ModelWeights weights_;
  CodeMatrix codes_;
  std::vector<BatchMatrix> pre_;
  std::vector<Eigen::Index> offsets_;
  std::vector<Eigen::MatrixXd> prefix_kernel_;
};

/// Seeds shared by every model scored for one table.
struct NwotConfig {
  int batch_size = kDefaultBatchSize;
  std::uint64_t weight_seed = 0;
  std::uint64_t batch_seed = 1;
};

NwotScore score_model(const ModelSpec& model, const ModelWeights& weights, const MiniBatch& batch);
NwotScore score_model(const ModelSpec& model, const NwotConfig& config);

/// candidate - reference; -inf when the candidate is degenerate, +inf when
/// only the reference is.
double score_difference(const NwotScore& candidate, const NwotScore& reference);

/// candidate_score - reference_score (positive means the candidate scores
/// higher). Identical assignments give exactly 0; a degenerate candidate
/// gives -inf; a degenerate reference with a finite candidate gives +inf.
double accuracy_delta(const ModelSpec& reference, const ModelSpec& candidate,
                      const ModelWeights& weights, const MiniBatch& batch);
double accuracy_delta(const ModelSpec& reference, const ModelSpec& candidate,
                      const NwotConfig& config);

}  // namespace actnas
