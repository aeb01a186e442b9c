#include <cmath>
#include <vector>

#include "doctest.h"
#include "drnet/adam.hpp"
#include "drnet/errors.hpp"
#include "drnet/rng.hpp"

using namespace drnet;

namespace {

struct ScalarParam {
  std::vector<double> value;
  std::vector<double> grad;

  ScalarParam(double v, double g) : value{v}, grad{g} {}
  std::vector<ParamView> views() {
    return {{"theta", value, grad, 1, 1}};
  }
};

}  // namespace

TEST_CASE("first step moves by ~alpha when g=1 (bias correction cancels)") {
  ScalarParam p(0.0, 1.0);
  AdamOptimizer adam;
  auto views = p.views();
  adam.step(views);
  // exact: -alpha·1/(1 + eps) with alpha=1e-3, eps=1e-8
  CHECK(p.value[0] == doctest::Approx(-0.001).epsilon(1e-7));
  CHECK(std::abs(p.value[0] + 0.00099999999) < 1e-10);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  ScalarParam p(1.5, 0.0);
  AdamOptimizer adam;
  auto views = p.views();
  for (int i = 0; i < 5; ++i) adam.step(views);
  CHECK(p.value[0] == 1.5);
}

TEST_CASE("two constant-gradient steps match the hand-computed trajectory") {
  // theta0=1, g=0.5 throughout, canonical hyperparameters; values computed
  // independently from the update equations.
  ScalarParam p(1.0, 0.5);
  AdamOptimizer adam;
  auto views = p.views();
  adam.step(views);
  CHECK(p.value[0] == doctest::Approx(0.99900000002).epsilon(1e-12));
  p.grad[0] = 0.5;
  adam.step(views);
  CHECK(p.value[0] == doctest::Approx(0.99800000004).epsilon(1e-12));
}

TEST_CASE("moment buffers are locked to the parameter shapes") {
  ScalarParam p(0.0, 1.0);
  AdamOptimizer adam;
  auto views = p.views();
  adam.step(views);

  std::vector<double> bigger_value{0.0, 0.0};
  std::vector<double> bigger_grad{1.0, 1.0};
  std::vector<ParamView> wrong{{"theta", bigger_value, bigger_grad, 2, 1}};
  CHECK_THROWS_AS(adam.step(wrong), ShapeError);

  std::vector<ParamView> too_many = p.views();
  too_many.push_back({"extra", bigger_value, bigger_grad, 2, 1});
  CHECK_THROWS_AS(adam.step(too_many), ShapeError);
}

TEST_CASE("constant gradient sign gives monotone opposite movement") {
  Rng rng(4);
  std::vector<double> value(8), grad(8), fixed_grad(8);
  for (std::size_t i = 0; i < 8; ++i) {
    value[i] = rng.uniform(-1.0, 1.0);
    fixed_grad[i] = rng.uniform(-2.0, 2.0);
    if (fixed_grad[i] == 0.0) fixed_grad[i] = 1.0;
  }
  std::vector<ParamView> views{{"p", value, grad, 8, 1}};
  AdamOptimizer adam;
  std::vector<double> previous = value;
  for (int step = 0; step < 20; ++step) {
    grad = fixed_grad;
    adam.step(views);
    for (std::size_t i = 0; i < 8; ++i) {
      if (fixed_grad[i] > 0.0) CHECK(value[i] < previous[i]);
      if (fixed_grad[i] < 0.0) CHECK(value[i] > previous[i]);
    }
    previous = value;
  }
}

TEST_CASE("per-step movement is bounded by ~alpha under constant gradients") {
  Rng rng(6);
  std::vector<double> value(16, 0.0), grad(16), fixed_grad(16);
  for (auto& g : fixed_grad) g = rng.uniform(0.1, 3.0);
  std::vector<ParamView> views{{"p", value, grad, 16, 1}};
  AdamConfig cfg;
  AdamOptimizer adam(cfg);
  std::vector<double> previous = value;
  for (int step = 0; step < 50; ++step) {
    grad = fixed_grad;
    adam.step(views);
    for (std::size_t i = 0; i < 16; ++i)
      CHECK(std::abs(value[i] - previous[i]) <= cfg.alpha * (1.0 + 1e-6));
    previous = value;
  }
}

TEST_CASE("adam minimises a 1-D convex quadratic") {
  // f(theta) = 0.5·(theta - 2)², gradient theta - 2, started far away.
  ScalarParam p(5.0, 0.0);
  AdamOptimizer adam;  // alpha = 0.001
  auto views = p.views();
  for (int step = 0; step < 10000; ++step) {
    p.grad[0] = p.value[0] - 2.0;
    adam.step(views);
  }
  CHECK(std::abs(p.value[0] - 2.0) < 0.1);
}
