#pragma once

// Small dense networks in double precision with exact reverse-mode
// gradients and a plain SGD update.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lta {

enum class Activation { kIdentity, kRelu, kTanh };

const char* activation_name(Activation act);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  int in_dim = 0;
  int out_dim = 0;
  // Row-major, out_dim x in_dim.
  std::vector<double> weights;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  double& w(int row, int col) { return weights[row * in_dim + col]; }
  double w(int row, int col) const { return weights[row * in_dim + col]; }
};

// Parameter-shaped container; one entry per layer.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  void scale(double factor);
  void add(const Gradients& other);
  bool all_finite() const;
  double max_abs() const;
};

struct SgdConfig {
  double learning_rate = 0.001;
  int epochs = 150;
  int batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // dims = {in, hidden..., out}. Hidden layers use `hidden`, the output
  // layer is linear. Weights are Glorot-uniform, biases zero.
  static DenseNet create(std::span<const int> dims, Activation hidden,
                         std::uint64_t seed);

  int in_dim() const;
  int out_dim() const;
  bool empty() const { return layers_.empty(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  Gradients zero_gradients() const;
  bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
};

// Layer inputs and pre-activations recorded by a forward pass.
struct ForwardCache {
  // inputs[l] is the input to layer l; inputs.back() is the network output.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre_activations;

  const std::vector<double>& output() const { return inputs.back(); }
};

std::vector<double> forward(const DenseNet& net, std::span<const double> input);
ForwardCache forward_cached(const DenseNet& net, std::span<const double> input);

struct BackwardResult {
  Gradients grads;
  std::vector<double> input_grad;
};

// Gradients of a scalar loss whose gradient w.r.t. the network output is
// `upstream`.
BackwardResult backward(const DenseNet& net, const ForwardCache& cache,
                        std::span<const double> upstream);
BackwardResult backward(const DenseNet& net, std::span<const double> input,
                        std::span<const double> upstream);

// params <- params - lr * grads. Throws TrainingError on non-finite
// gradients, naming the offending layer.
void sgd_step(DenseNet& net, const Gradients& grads, const SgdConfig& cfg);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

int argmax(std::span<const double> values);

}  // namespace lta
