#include "drnet/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "drnet/errors.hpp"
#include "json.hpp"

namespace drnet {

std::string fusion_name(Fusion fusion) {
  switch (fusion) {
    case Fusion::kPlain: return "plain";
    case Fusion::kEarlyFusion: return "early";
    case Fusion::kMidFusion: return "mid";
  }
  throw ArgumentError("fusion_name: unknown fusion");
}

Fusion fusion_from_name(const std::string& name) {
  if (name == "plain") return Fusion::kPlain;
  if (name == "early") return Fusion::kEarlyFusion;
  if (name == "mid") return Fusion::kMidFusion;
  throw ArgumentError("unknown architecture name: " + name);
}

namespace {

void validate_spec(const NetworkSpec& spec) {
  if (spec.n < 2) throw ArgumentError("NetworkSpec: n must be >= 2");
  if (spec.hidden_sizes.empty())
    throw ArgumentError("NetworkSpec: at least one hidden layer required");
  for (std::size_t h : spec.hidden_sizes)
    if (h == 0) throw ArgumentError("NetworkSpec: hidden layer size must be positive");
  if (spec.output_size < 2) throw ArgumentError("NetworkSpec: output_size must be >= 2");
}

}  // namespace

Network::Network(const NetworkSpec& spec) : spec_(spec), dr_(spec.n) {
  validate_spec(spec_);
  const std::size_t n = spec_.n;
  std::size_t width = spec_.fusion == Fusion::kEarlyFusion ? 3 * n : 2 * n;
  for (std::size_t i = 0; i < spec_.hidden_sizes.size(); ++i) {
    dense_.emplace_back(width, spec_.hidden_sizes[i]);
    relus_.emplace_back();
    width = spec_.hidden_sizes[i];
    if (spec_.fusion == Fusion::kMidFusion && i == 0) width += n;
  }
  dense_.emplace_back(width, spec_.output_size);
}

namespace {

// Hidden layers start at half the He-uniform range so their initial feature
// noise sits below the DR vote margin; the vote itself must outweigh the
// learned negative-class bias, which saturates around 4-6 logits.
constexpr double kHiddenInitScale = 0.5;
constexpr double kDrVoteInit = 8.0;

}  // namespace

Network::Network(const NetworkSpec& spec, Rng& rng) : Network(spec) {
  for (std::size_t i = 0; i + 1 < dense_.size(); ++i)
    dense_[i].init_he_uniform(rng, kHiddenInitScale);
  dense_.back().init_xavier_uniform(rng);
  init_scheme_ = "he_uniform/2+xavier_uniform";
  if (spec_.fusion == Fusion::kMidFusion && spec_.hidden_sizes.size() == 1) {
    // DR block feeds the output layer directly: seed its columns with the
    // difference-means-unequal vote.
    auto& out = dense_.back();
    for (std::size_t col = spec_.hidden_sizes[0]; col < out.in_size(); ++col) {
      out.weights_(static_cast<std::size_t>(Label::kNegative), col) = kDrVoteInit;
      out.weights_(static_cast<std::size_t>(Label::kPositive), col) = -kDrVoteInit;
    }
    init_scheme_ += "+dr_vote";
  }
}

Network build_network(const NetworkSpec& spec, Rng& rng) { return {spec, rng}; }

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : dense_) total += layer.parameter_count();
  return total;
}

std::vector<double> Network::forward(const std::vector<double>& input) {
  if (input.size() != input_size())
    throw ShapeError("Network::forward: input length " + std::to_string(input.size()) +
                     ", expected " + std::to_string(input_size()));

  std::vector<double> activation;
  if (spec_.fusion == Fusion::kEarlyFusion) {
    auto dr = dr_.forward(input);
    activation = input;
    activation.insert(activation.end(), dr.begin(), dr.end());
  } else {
    activation = input;
  }

  for (std::size_t i = 0; i < spec_.hidden_sizes.size(); ++i) {
    activation = relus_[i].forward(dense_[i].forward(activation));
    if (spec_.fusion == Fusion::kMidFusion && i == 0) {
      auto dr = dr_.forward(input);
      activation.insert(activation.end(), dr.begin(), dr.end());
    }
  }
  return dense_.back().forward(activation);
}

LossOutput Network::loss(const std::vector<double>& input, std::size_t label) {
  return softmax_xent(forward(input), label);
}

void Network::backward(const LossOutput& head) {
  std::vector<double> grad = dense_.back().backward(head.logit_grad);
  for (std::size_t i = spec_.hidden_sizes.size(); i-- > 0;) {
    if (spec_.fusion == Fusion::kMidFusion && i == 0) {
      // Split off the DR block; it carries no trainable parameters upstream.
      grad.resize(spec_.hidden_sizes[0]);
    }
    grad = dense_[i].backward(relus_[i].backward(grad));
  }
}

void Network::zero_grads() {
  for (auto& layer : dense_) layer.zero_grads();
}

std::vector<ParamView> Network::parameters() {
  std::vector<ParamView> params;
  params.reserve(2 * dense_.size());
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    auto& layer = dense_[i];
    const std::string name = "dense" + std::to_string(i);
    params.push_back({name + ".w", layer.weights_.flat(), layer.grad_weights_.flat(),
                      layer.out_size(), layer.in_size()});
    params.push_back({name + ".b", layer.bias_, layer.grad_bias_, layer.out_size(), 1});
  }
  return params;
}

std::vector<std::uint8_t> Network::relu_pattern() const {
  std::vector<std::uint8_t> pattern;
  for (const auto& r : relus_) {
    auto p = r.activation_pattern();
    pattern.insert(pattern.end(), p.begin(), p.end());
  }
  return pattern;
}

std::vector<double> Network::dr_output(const std::vector<double>& input) const {
  if (input.size() != input_size())
    throw ShapeError("Network::dr_output: input length mismatch");
  std::vector<double> out(spec_.n);
  for (std::size_t i = 0; i < spec_.n; ++i)
    out[i] = std::abs(input[i] - input[spec_.n + i]);
  return out;
}

std::vector<double> Network::encode(const BinaryPair& pair) {
  std::vector<double> input;
  input.reserve(pair.vec1.size() + pair.vec2.size());
  for (auto b : pair.vec1) input.push_back(static_cast<double>(b));
  for (auto b : pair.vec2) input.push_back(static_cast<double>(b));
  return input;
}

RunResult train(Network& net, const Dataset& train_ds, const TrainConfig& cfg,
                const Dataset* test_ds) {
  if (train_ds.n != net.spec().n)
    throw ShapeError("train: dataset dimensionality " + std::to_string(train_ds.n) +
                     " does not match network n=" + std::to_string(net.spec().n));
  if (train_ds.pairs.empty()) throw ArgumentError("train: empty training set");

  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.seed = cfg.seed;
  result.init_scheme = net.init_scheme();

  const std::size_t count = train_ds.pairs.size();
  const std::size_t batch = cfg.batch_size == 0 ? count : std::min(cfg.batch_size, count);

  AdamOptimizer adam(cfg.adam);
  auto params = net.parameters();
  Rng shuffle_rng(mix_seed(cfg.seed, 0x51u));
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs && !result.diverged; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < count; begin += batch) {
      const std::size_t end = std::min(begin + batch, count);
      net.zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& pair = train_ds.pairs[order[k]];
        LossOutput head;
        try {
          head = net.loss(Network::encode(pair), static_cast<std::size_t>(pair.label));
        } catch (const ArgumentError&) {
          result.diverged = true;  // non-finite logits
          break;
        }
        if (!std::isfinite(head.loss)) {
          result.diverged = true;
          break;
        }
        net.backward(head);
        batch_loss += head.loss;
      }
      if (result.diverged) {
        result.note = "non-finite loss at epoch " + std::to_string(epoch + 1);
        break;
      }
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (auto& p : params)
        for (auto& g : p.grads) g *= scale;
      adam.step(params);
      epoch_loss += batch_loss;
    }
    if (!result.diverged) result.epoch_losses.push_back(epoch_loss / count);
  }

  if (!result.diverged) {
    result.train_accuracy = evaluate(net, train_ds);
    if (test_ds != nullptr) result.test_accuracy = evaluate(net, *test_ds);
  }
  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double evaluate(Network& net, const Dataset& ds) {
  if (ds.pairs.empty()) throw ArgumentError("evaluate: empty dataset");
  if (ds.n != net.spec().n)
    throw ShapeError("evaluate: dataset dimensionality does not match network");
  std::size_t correct = 0;
  for (const auto& pair : ds.pairs) {
    const auto logits = net.forward(Network::encode(pair));
    std::size_t prediction = 0;
    for (std::size_t c = 1; c < logits.size(); ++c)
      if (logits[c] > logits[prediction]) prediction = c;  // ties stay at the lower index
    if (prediction == static_cast<std::size_t>(pair.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.pairs.size());
}

void save_model(const Network& net, const ModelMeta& meta, const std::string& path) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "drnet-model";
  doc["spec"] = {{"fusion", fusion_name(net.spec().fusion)},
                 {"n", net.spec().n},
                 {"hidden_sizes", net.spec().hidden_sizes},
                 {"output_size", net.spec().output_size}};
  doc["seed"] = meta.seed;
  doc["init_scheme"] = meta.init_scheme;
  try {
    doc["config"] = nlohmann::json::parse(meta.config_json);
  } catch (const nlohmann::json::parse_error&) {
    doc["config"] = meta.config_json;
  }
  auto layers = nlohmann::json::array();
  for (std::size_t i = 0; i < net.dense_layer_count(); ++i) {
    const auto& layer = net.dense_layer(i);
    nlohmann::json l;
    l["name"] = "dense" + std::to_string(i);
    l["in"] = layer.in_size();
    l["out"] = layer.out_size();
    l["weights"] = std::vector<double>(layer.weights_.flat().begin(),
                                       layer.weights_.flat().end());
    l["bias"] = layer.bias_;
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
  if (!out.good()) throw IoError("write failed: " + path);
}

std::pair<Network, ModelMeta> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ArgumentError("model parse: " + std::string(e.what()));
  }
  try {
    if (doc.at("kind").get<std::string>() != "drnet-model")
      throw ArgumentError("model parse: not a drnet model file");
    if (doc.at("format_version").get<int>() != 1)
      throw ArgumentError("model parse: unsupported format version");

    NetworkSpec spec;
    const auto& s = doc.at("spec");
    spec.fusion = fusion_from_name(s.at("fusion").get<std::string>());
    spec.n = s.at("n").get<std::size_t>();
    spec.hidden_sizes = s.at("hidden_sizes").get<std::vector<std::size_t>>();
    spec.output_size = s.at("output_size").get<std::size_t>();

    Network net(spec);
    const auto& layers = doc.at("layers");
    if (layers.size() != net.dense_layer_count())
      throw ArgumentError("model parse: layer count mismatch");
    for (std::size_t i = 0; i < net.dense_layer_count(); ++i) {
      auto& layer = net.dense_layer(i);
      const auto weights = layers[i].at("weights").get<std::vector<double>>();
      const auto bias = layers[i].at("bias").get<std::vector<double>>();
      if (weights.size() != layer.weights_.size() || bias.size() != layer.bias_.size())
        throw ArgumentError("model parse: parameter shape mismatch in layer " +
                            std::to_string(i));
      std::copy(weights.begin(), weights.end(), layer.weights_.flat().begin());
      layer.bias_ = bias;
    }

    ModelMeta meta;
    meta.seed = doc.value("seed", 0ULL);
    meta.init_scheme = doc.value("init_scheme", std::string{});
    if (doc.contains("config")) meta.config_json = doc["config"].dump();
    net.set_init_scheme(meta.init_scheme.empty() ? "loaded" : meta.init_scheme);
    return {std::move(net), std::move(meta)};
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("model parse: " + std::string(e.what()));
  }
}

}  // namespace drnet
