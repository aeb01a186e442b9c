#include "drnet/layers.hpp"

#include <algorithm>
#include <cmath>

#include "drnet/errors.hpp"

namespace drnet {

std::vector<double> relu(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

LossOutput softmax_xent(const std::vector<double>& logits, std::size_t true_class) {
  if (logits.empty()) throw ArgumentError("softmax_xent: empty logits");
  if (true_class >= logits.size())
    throw ArgumentError("softmax_xent: true_class out of range");
  for (double v : logits)
    if (!std::isfinite(v)) throw ArgumentError("softmax_xent: non-finite logit");

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  LossOutput out;
  out.probabilities.resize(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probabilities[i] = std::exp(logits[i] - max_logit);
    sum += out.probabilities[i];
  }
  for (auto& p : out.probabilities) p /= sum;
  // -log p[t] in log-sum-exp form; never overflows and is >= 0 by construction.
  out.loss = std::log(sum) - (logits[true_class] - max_logit);
  out.logit_grad = out.probabilities;
  out.logit_grad[true_class] -= 1.0;
  return out;
}

DenseLayer::DenseLayer(std::size_t in_size, std::size_t out_size)
    : weights_(out_size, in_size),
      grad_weights_(out_size, in_size),
      bias_(out_size, 0.0),
      grad_bias_(out_size, 0.0) {}

void DenseLayer::init_he_uniform(Rng& rng, double scale) {
  const double limit = scale * std::sqrt(6.0 / static_cast<double>(in_size()));
  for (double& w : weights_.flat()) w = rng.uniform(-limit, limit);
  std::fill(bias_.begin(), bias_.end(), 0.0);
}

void DenseLayer::init_xavier_uniform(Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in_size() + out_size()));
  for (double& w : weights_.flat()) w = rng.uniform(-limit, limit);
  std::fill(bias_.begin(), bias_.end(), 0.0);
}

std::vector<double> DenseLayer::forward(const std::vector<double>& x) {
  if (x.size() != in_size())
    throw ShapeError("DenseLayer::forward: input length " + std::to_string(x.size()) +
                     ", expected " + std::to_string(in_size()));
  cached_input_ = x;
  has_cached_input_ = true;
  std::vector<double> y = matvec(weights_, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bias_[i];
  return y;
}

std::vector<double> DenseLayer::backward(const std::vector<double>& upstream) {
  if (!has_cached_input_)
    throw ContractError("DenseLayer::backward: no forward pass cached");
  if (upstream.size() != out_size())
    throw ShapeError("DenseLayer::backward: upstream length " +
                     std::to_string(upstream.size()) + ", expected " +
                     std::to_string(out_size()));
  for (std::size_t r = 0; r < out_size(); ++r) {
    const double u = upstream[r];
    grad_bias_[r] += u;
    if (u == 0.0) continue;
    for (std::size_t c = 0; c < in_size(); ++c)
      grad_weights_(r, c) += u * cached_input_[c];
  }
  std::vector<double> grad_x(in_size(), 0.0);
  for (std::size_t r = 0; r < out_size(); ++r) {
    const double u = upstream[r];
    if (u == 0.0) continue;
    for (std::size_t c = 0; c < in_size(); ++c) grad_x[c] += weights_(r, c) * u;
  }
  return grad_x;
}

void DenseLayer::zero_grads() {
  std::fill(grad_weights_.flat().begin(), grad_weights_.flat().end(), 0.0);
  std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
}

std::vector<double> ReluLayer::forward(const std::vector<double>& x) {
  cached_input_ = x;
  has_cached_input_ = true;
  return relu(x);
}

std::vector<double> ReluLayer::backward(const std::vector<double>& upstream) {
  if (!has_cached_input_)
    throw ContractError("ReluLayer::backward: no forward pass cached");
  if (upstream.size() != cached_input_.size())
    throw ShapeError("ReluLayer::backward: upstream length mismatch");
  std::vector<double> grad(upstream.size());
  for (std::size_t i = 0; i < upstream.size(); ++i)
    grad[i] = cached_input_[i] > 0.0 ? upstream[i] : 0.0;
  return grad;
}

std::vector<std::uint8_t> ReluLayer::activation_pattern() const {
  std::vector<std::uint8_t> pattern(cached_input_.size());
  for (std::size_t i = 0; i < cached_input_.size(); ++i)
    pattern[i] = cached_input_[i] > 0.0 ? 1 : 0;
  return pattern;
}

std::vector<double> DrLayer::forward(const std::vector<double>& concat_input) {
  if (concat_input.size() % 2 != 0 || concat_input.size() != 2 * dim_)
    throw ShapeError("DrLayer::forward: input length " +
                     std::to_string(concat_input.size()) + ", expected " +
                     std::to_string(2 * dim_));
  cached_input_ = concat_input;
  has_cached_input_ = true;
  std::vector<double> out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    out[i] = std::abs(concat_input[i] - concat_input[dim_ + i]);
  return out;
}

std::vector<double> DrLayer::backward(const std::vector<double>& upstream) {
  if (!has_cached_input_)
    throw ContractError("DrLayer::backward: no forward pass cached");
  if (upstream.size() != dim_)
    throw ShapeError("DrLayer::backward: upstream length " +
                     std::to_string(upstream.size()) + ", expected " +
                     std::to_string(dim_));
  std::vector<double> grad(2 * dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    const double diff = cached_input_[i] - cached_input_[dim_ + i];
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    grad[i] = sign * upstream[i];
    grad[dim_ + i] = -sign * upstream[i];
  }
  return grad;
}

}  // namespace drnet
