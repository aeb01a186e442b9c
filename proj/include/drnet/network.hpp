#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drnet/adam.hpp"
#include "drnet/dataset.hpp"
#include "drnet/layers.hpp"
#include "drnet/rng.hpp"

namespace drnet {

/// How the differential rectifier units are wired into the network.
/// In both fusion modes the DR units read the raw 2n network inputs.
enum class Fusion {
  kPlain,        // 2n inputs -> hidden stack -> output
  kEarlyFusion,  // DR outputs concatenated to the raw inputs (3n wide)
  kMidFusion,    // DR outputs appended to the first hidden activation
};

std::string fusion_name(Fusion fusion);
Fusion fusion_from_name(const std::string& name);

struct NetworkSpec {
  Fusion fusion = Fusion::kPlain;
  std::size_t n = 0;  // binary vector dimensionality; inputs are 2n wide
  std::vector<std::size_t> hidden_sizes = {10};
  std::size_t output_size = 2;
};

/// Feed-forward classifier over concatenated binary vector pairs with
/// hand-written backprop. The DR path carries no trainable parameters.
class Network {
 public:
  /// Uninitialised (all-zero) parameters; used by the model loader.
  explicit Network(const NetworkSpec& spec);
  /// Half-scale He-uniform init for ReLU-feeding layers, Xavier-uniform for
  /// the output layer. When the DR block feeds the output layer directly
  /// (mid fusion with a single hidden layer), its output columns start with a
  /// fixed trainable vote: DR activity pushes the negative-relation class.
  /// The vote encodes what a DR unit measures by construction — a per-dim
  /// input difference — not anything learned from data, and the tiny
  /// small-n training splits cannot pin those weights down on their own.
  Network(const NetworkSpec& spec, Rng& rng);

  const NetworkSpec& spec() const { return spec_; }
  const std::string& init_scheme() const { return init_scheme_; }
  void set_init_scheme(std::string scheme) { init_scheme_ = std::move(scheme); }
  std::size_t input_size() const { return 2 * spec_.n; }
  std::size_t parameter_count() const;

  /// Logits for one encoded input (length 2n). Caches activations.
  std::vector<double> forward(const std::vector<double>& input);
  /// forward + softmax cross-entropy against `label`.
  LossOutput loss(const std::vector<double>& input, std::size_t label);
  /// Accumulates parameter gradients; requires a preceding forward/loss.
  void backward(const LossOutput& head);

  void zero_grads();
  std::vector<ParamView> parameters();

  /// ReLU input sign pattern of the last forward; two perturbed passes with
  /// different patterns straddle a kink.
  std::vector<std::uint8_t> relu_pattern() const;

  /// DR unit outputs for an input, without touching cached state.
  std::vector<double> dr_output(const std::vector<double>& input) const;

  static std::vector<double> encode(const BinaryPair& pair);

  std::size_t dense_layer_count() const { return dense_.size(); }
  DenseLayer& dense_layer(std::size_t i) { return dense_[i]; }
  const DenseLayer& dense_layer(std::size_t i) const { return dense_[i]; }

 private:
  NetworkSpec spec_;
  std::vector<DenseLayer> dense_;
  std::vector<ReluLayer> relus_;
  DrLayer dr_;
  std::string init_scheme_ = "uninitialised";
};

Network build_network(const NetworkSpec& spec, Rng& rng);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;  // 0 = full batch
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct RunResult {
  std::uint64_t seed = 0;
  double train_accuracy = -1.0;
  double test_accuracy = -1.0;
  std::vector<double> epoch_losses;
  double duration_seconds = 0.0;
  bool diverged = false;
  std::string note;
  std::string init_scheme;  // copied from the network at train time
};

/// Mini-batch training with Adam. Deterministic for a fixed config seed.
/// A non-finite batch loss aborts the run and is reported via
/// RunResult::diverged instead of throwing.
RunResult train(Network& net, const Dataset& train_ds, const TrainConfig& cfg,
                const Dataset* test_ds = nullptr);

/// Fraction of pairs whose argmax class matches the label; exact probability
/// ties resolve to class 0. Throws ArgumentError on an empty dataset.
double evaluate(Network& net, const Dataset& ds);

struct ModelMeta {
  std::uint64_t seed = 0;
  std::string init_scheme;
  std::string config_json = "{}";  // effective training config, for provenance
};

void save_model(const Network& net, const ModelMeta& meta, const std::string& path);
std::pair<Network, ModelMeta> load_model(const std::string& path);

}  // namespace drnet
