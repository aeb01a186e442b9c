#include "drnet/adam.hpp"

#include <cmath>

#include "drnet/errors.hpp"

namespace drnet {

void AdamOptimizer::step(std::vector<ParamView>& params) {
  if (step_ == 0) {
    first_moments_.reserve(params.size());
    second_moments_.reserve(params.size());
    for (const auto& p : params) {
      first_moments_.emplace_back(p.values.size(), 0.0);
      second_moments_.emplace_back(p.values.size(), 0.0);
    }
  }
  if (params.size() != first_moments_.size())
    throw ShapeError("AdamOptimizer::step: parameter tensor count changed");

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));

  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t];
    auto& m = first_moments_[t];
    auto& v = second_moments_[t];
    if (p.values.size() != m.size() || p.grads.size() != p.values.size())
      throw ShapeError("AdamOptimizer::step: gradient shape does not match " + p.name);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      const double g = p.grads[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.values[i] -= config_.alpha * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace drnet
