#include "lta/nn_core.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lta/errors.h"
#include "lta/random.h"

namespace lta {
namespace {

double activate(Activation act, double v) {
  switch (act) {
    case Activation::kIdentity:
      return v;
    case Activation::kRelu:
      return v > 0.0 ? v : 0.0;
    case Activation::kTanh:
      return std::tanh(v);
  }
  return v;
}

// Derivative expressed through the pre-activation and the output.
double activate_grad(Activation act, double pre, double out) {
  switch (act) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kRelu:
      return pre > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - out * out;
  }
  return 1.0;
}

}  // namespace

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw DataError("unknown activation '" + name + "'");
}

void Gradients::scale(double factor) {
  for (auto& w : weights) {
    for (double& v : w) v *= factor;
  }
  for (auto& b : bias) {
    for (double& v : b) v *= factor;
  }
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t k = 0; k < weights[l].size(); ++k) {
      weights[l][k] += other.weights[l][k];
    }
    for (std::size_t k = 0; k < bias[l].size(); ++k) {
      bias[l][k] += other.bias[l][k];
    }
  }
}

bool Gradients::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  return std::all_of(weights.begin(), weights.end(), finite) &&
         std::all_of(bias.begin(), bias.end(), finite);
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) {
    for (double v : w) m = std::max(m, std::abs(v));
  }
  for (const auto& b : bias) {
    for (double v : b) m = std::max(m, std::abs(v));
  }
  return m;
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("sgd.learning_rate must be > 0");
  if (epochs < 0) throw ConfigError("sgd.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("sgd.batch_size must be >= 1");
}

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.in_dim < 1 || layer.out_dim < 1 ||
        layer.weights.size() !=
            static_cast<std::size_t>(layer.in_dim) * layer.out_dim ||
        layer.bias.size() != static_cast<std::size_t>(layer.out_dim)) {
      throw DataError("layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (l > 0 && layers_[l - 1].out_dim != layer.in_dim) {
      throw DataError("layer " + std::to_string(l) +
                      " input does not chain with previous output");
    }
  }
}

DenseNet DenseNet::create(std::span<const int> dims, Activation hidden,
                          std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("network needs at least in/out dims");
  Rng rng = make_rng(seed, 0);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.in_dim = dims[l];
    layer.out_dim = dims[l + 1];
    if (layer.in_dim < 1 || layer.out_dim < 1) {
      throw ConfigError("network dims must be positive");
    }
    layer.activation = (l + 2 == dims.size()) ? Activation::kIdentity : hidden;
    const double limit = std::sqrt(6.0 / (layer.in_dim + layer.out_dim));
    std::uniform_real_distribution<double> init(-limit, limit);
    layer.weights.resize(static_cast<std::size_t>(layer.in_dim) * layer.out_dim);
    for (double& w : layer.weights) w = init(rng);
    layer.bias.assign(layer.out_dim, 0.0);
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::in_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim; }
int DenseNet::out_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim; }

Gradients DenseNet::zero_gradients() const {
  Gradients g;
  for (const DenseLayer& layer : layers_) {
    g.weights.emplace_back(layer.weights.size(), 0.0);
    g.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return g;
}

bool DenseNet::all_finite() const {
  for (const DenseLayer& layer : layers_) {
    for (double v : layer.weights) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : layer.bias) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

ForwardCache forward_cached(const DenseNet& net, std::span<const double> input) {
  if (static_cast<int>(input.size()) != net.in_dim()) {
    throw DataError("network expects input of size " +
                    std::to_string(net.in_dim()) + ", got " +
                    std::to_string(input.size()));
  }
  ForwardCache cache;
  cache.inputs.reserve(net.layers().size() + 1);
  cache.pre_activations.reserve(net.layers().size());
  cache.inputs.emplace_back(input.begin(), input.end());
  for (const DenseLayer& layer : net.layers()) {
    const std::vector<double>& in = cache.inputs.back();
    std::vector<double> pre(layer.out_dim);
    std::vector<double> out(layer.out_dim);
    for (int r = 0; r < layer.out_dim; ++r) {
      double acc = layer.bias[r];
      const double* row = &layer.weights[static_cast<std::size_t>(r) * layer.in_dim];
      for (int c = 0; c < layer.in_dim; ++c) acc += row[c] * in[c];
      pre[r] = acc;
      out[r] = activate(layer.activation, acc);
    }
    cache.pre_activations.push_back(std::move(pre));
    cache.inputs.push_back(std::move(out));
  }
  return cache;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> input) {
  return std::move(forward_cached(net, input).inputs.back());
}

BackwardResult backward(const DenseNet& net, const ForwardCache& cache,
                        std::span<const double> upstream) {
  if (static_cast<int>(upstream.size()) != net.out_dim()) {
    throw DataError("upstream gradient has size " +
                    std::to_string(upstream.size()) + ", network output is " +
                    std::to_string(net.out_dim()));
  }
  const auto& layers = net.layers();
  BackwardResult result;
  result.grads = net.zero_gradients();
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const std::vector<double>& in = cache.inputs[l];
    const std::vector<double>& pre = cache.pre_activations[l];
    const std::vector<double>& out = cache.inputs[l + 1];
    for (int r = 0; r < layer.out_dim; ++r) {
      delta[r] *= activate_grad(layer.activation, pre[r], out[r]);
    }
    std::vector<double>& gw = result.grads.weights[l];
    std::vector<double>& gb = result.grads.bias[l];
    std::vector<double> next(layer.in_dim, 0.0);
    for (int r = 0; r < layer.out_dim; ++r) {
      const double d = delta[r];
      gb[r] = d;
      if (d == 0.0) continue;
      const std::size_t base = static_cast<std::size_t>(r) * layer.in_dim;
      for (int c = 0; c < layer.in_dim; ++c) {
        gw[base + c] = d * in[c];
        next[c] += layer.weights[base + c] * d;
      }
    }
    delta = std::move(next);
  }
  result.input_grad = std::move(delta);
  return result;
}

BackwardResult backward(const DenseNet& net, std::span<const double> input,
                        std::span<const double> upstream) {
  return backward(net, forward_cached(net, input), upstream);
}

void sgd_step(DenseNet& net, const Gradients& grads, const SgdConfig& cfg) {
  auto& layers = net.mutable_layers();
  if (grads.weights.size() != layers.size()) {
    throw DataError("gradient/network layer count mismatch");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (grads.weights[l].size() != layers[l].weights.size() ||
        grads.bias[l].size() != layers[l].bias.size()) {
      throw DataError("gradient shape mismatch at layer " + std::to_string(l));
    }
    for (double v : grads.weights[l]) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite weight gradient in layer " +
                            std::to_string(l));
      }
    }
    for (double v : grads.bias[l]) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite bias gradient in layer " +
                            std::to_string(l));
      }
    }
  }
  const double lr = cfg.learning_rate;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t k = 0; k < layers[l].weights.size(); ++k) {
      layers[l].weights[k] -= lr * grads.weights[l][k];
    }
    for (std::size_t k = 0; k < layers[l].bias.size(); ++k) {
      layers[l].bias[k] -= lr * grads.bias[l][k];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - mx);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return out;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

}  // namespace lta
