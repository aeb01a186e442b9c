#include "doctest.h"
#include "drnet/errors.hpp"
#include "drnet/gradcheck.hpp"

using namespace drnet;

namespace {

BinaryPair unequal_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds = generate_equality_dataset(n, rng);
  for (const auto& p : ds.pairs)
    if (p.label == Label::kNegative) return p;
  throw std::logic_error("no negative pair generated");
}

BinaryPair equal_pair(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds = generate_equality_dataset(n, rng);
  for (const auto& p : ds.pairs)
    if (p.label == Label::kPositive && std::count(p.vec1.begin(), p.vec1.end(), 1) > 0)
      return p;
  throw std::logic_error("no positive pair generated");
}

Network fresh_network(Fusion fusion, std::size_t n, std::uint64_t seed) {
  NetworkSpec spec;
  spec.fusion = fusion;
  spec.n = n;
  Rng rng(seed);
  return Network(spec, rng);
}

}  // namespace

TEST_CASE("analytic gradients match finite differences on all architectures") {
  for (Fusion fusion : {Fusion::kPlain, Fusion::kEarlyFusion, Fusion::kMidFusion}) {
    for (std::size_t n : {2, 10}) {
      Network net = fresh_network(fusion, n, 100 + n);
      auto result = gradient_check(net, unequal_pair(n, 7), 1e-5);
      INFO("fusion=", fusion_name(fusion), " n=", n,
           " error=", result.max_rel_error);
      CHECK(result.max_rel_error < 1e-4);
      CHECK(result.params_checked > 0);
    }
  }
}

TEST_CASE("gradient check passes on an equal pair (DR output at the kink)") {
  Network net = fresh_network(Fusion::kMidFusion, 4, 21);
  auto result = gradient_check(net, equal_pair(4, 3), 1e-5);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("gradient check on a deeper configuration") {
  NetworkSpec spec;
  spec.fusion = Fusion::kMidFusion;
  spec.n = 3;
  spec.hidden_sizes = {20, 30};
  Rng rng(5);
  Network net(spec, rng);
  auto result = gradient_check(net, unequal_pair(3, 9), 1e-5);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("parameters feeding a dead unit have exactly zero error") {
  Network net = fresh_network(Fusion::kPlain, 3, 8);
  // Kill one hidden unit outright: large negative bias, zero weights.
  auto& first = net.dense_layer(0);
  for (std::size_t c = 0; c < first.in_size(); ++c) first.weights_(0, c) = 0.0;
  first.bias_[0] = -100.0;

  const BinaryPair sample = unequal_pair(3, 2);
  net.zero_grads();
  net.backward(net.loss(Network::encode(sample), static_cast<std::size_t>(sample.label)));
  // Upstream into the dead unit's incoming weights is zero.
  for (std::size_t c = 0; c < first.in_size(); ++c)
    CHECK(net.dense_layer(0).grad_weights_(0, c) == 0.0);

  auto result = gradient_check(net, sample, 1e-5);
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("epsilon outside the supported window is rejected") {
  Network net = fresh_network(Fusion::kPlain, 2, 1);
  const BinaryPair sample = unequal_pair(2, 1);
  CHECK_THROWS_AS(gradient_check(net, sample, 10.0), ArgumentError);
  CHECK_THROWS_AS(gradient_check(net, sample, 1e-8), ArgumentError);
  CHECK_NOTHROW(gradient_check(net, sample, 1e-3));
}
