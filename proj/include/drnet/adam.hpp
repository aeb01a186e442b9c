#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace drnet {

/// View over one parameter tensor and its gradient accumulator.
struct ParamView {
  std::string name;
  std::span<double> values;
  std::span<double> grads;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected first/second moments. Moment buffers mirror the
/// parameter tensors one-to-one; shapes are locked at the first step and a
/// mismatch on a later step throws ShapeError.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return step_; }

  /// θ ← θ − α·m̂/(√v̂+ε) using the gradients currently held in `params`.
  void step(std::vector<ParamView>& params);

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> first_moments_;
  std::vector<std::vector<double>> second_moments_;
};

}  // namespace drnet
