#pragma once

#include <vector>

#include "drnet/matrix.hpp"
#include "drnet/rng.hpp"

namespace drnet {

/// Result of the softmax + cross-entropy head.
struct LossOutput {
  double loss = 0.0;
  std::vector<double> probabilities;
  std::vector<double> logit_grad;  // d(loss)/d(logits) = p - onehot(true_class)
};

/// Elementwise max(0, x).
std::vector<double> relu(const std::vector<double>& x);

/// Numerically stabilised softmax cross-entropy (max subtraction; the loss is
/// computed in log-sum-exp form so it stays finite for extreme logits).
LossOutput softmax_xent(const std::vector<double>& logits, std::size_t true_class);

/// Fully connected layer, weights stored out×in, gradients accumulated
/// alongside. forward() caches its input; backward() requires a prior
/// forward and throws ContractError otherwise.
class DenseLayer {
 public:
  DenseLayer(std::size_t in_size, std::size_t out_size);

  void init_he_uniform(Rng& rng, double scale = 1.0);
  void init_xavier_uniform(Rng& rng);

  std::size_t in_size() const { return weights_.cols(); }
  std::size_t out_size() const { return weights_.rows(); }
  std::size_t parameter_count() const { return weights_.size() + bias_.size(); }

  std::vector<double> forward(const std::vector<double>& x);
  /// Accumulates weight/bias gradients and returns d(loss)/d(input).
  std::vector<double> backward(const std::vector<double>& upstream);

  void zero_grads();

  Matrix weights_;
  Matrix grad_weights_;
  std::vector<double> bias_;
  std::vector<double> grad_bias_;

 private:
  std::vector<double> cached_input_;
  bool has_cached_input_ = false;
};

/// ReLU with cached pre-activations for the backward pass.
class ReluLayer {
 public:
  std::vector<double> forward(const std::vector<double>& x);
  std::vector<double> backward(const std::vector<double>& upstream);

  /// Sign pattern (x > 0) of the last cached input; used to detect kink
  /// crossings during finite-difference checks.
  std::vector<std::uint8_t> activation_pattern() const;

 private:
  std::vector<double> cached_input_;
  bool has_cached_input_ = false;
};

/// Differential rectifier bank: one parameter-free unit per vector dimension,
/// computing |x_i - y_i| over a concatenated (x ++ y) input with input
/// weights fixed at 1. No bias, no further activation.
class DrLayer {
 public:
  explicit DrLayer(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  /// input has length 2n (first half x, second half y); output length n.
  std::vector<double> forward(const std::vector<double>& concat_input);

  /// Subgradient of |x - y|: sign(x_i - y_i)·u_i toward the first half, its
  /// negation toward the second; sign(0) := 0 so equal pairs are stationary.
  std::vector<double> backward(const std::vector<double>& upstream);

 private:
  std::size_t dim_;
  std::vector<double> cached_input_;
  bool has_cached_input_ = false;
};

}  // namespace drnet
