#include "drnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "drnet/errors.hpp"

namespace drnet {

GradCheckResult gradient_check(Network& net, const BinaryPair& sample, double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3))
    throw ArgumentError("gradient_check: epsilon must be in [1e-7, 1e-3]");

  const auto input = Network::encode(sample);
  const auto label = static_cast<std::size_t>(sample.label);

  net.zero_grads();
  net.backward(net.loss(input, label));

  auto params = net.parameters();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.emplace_back(p.grads.begin(), p.grads.end());

  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& values = params[t].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];

      values[i] = saved + epsilon;
      const double loss_plus = net.loss(input, label).loss;
      const auto pattern_plus = net.relu_pattern();

      values[i] = saved - epsilon;
      const double loss_minus = net.loss(input, label).loss;
      const auto pattern_minus = net.relu_pattern();

      values[i] = saved;

      if (pattern_plus != pattern_minus) {
        ++result.params_skipped;
        continue;
      }

      const double numeric = (loss_plus - loss_minus) / (2.0 * epsilon);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-4});
      const double rel = std::abs(a - numeric) / denom;
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.params_checked;
    }
  }
  // Restore caches to a state consistent with the unperturbed parameters.
  net.forward(input);
  return result;
}

}  // namespace drnet
