#pragma once

// The enriched predictor g(x, h): a dense network that also consumes
// expert feedback h, either concatenated onto x or through feature-wise
// affine modulation of the first hidden layer.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lta/nn_core.h"

namespace lta {

enum class Injection {
  kConcat,
  kFilm,
  // logits = log(h); reproduces an expert whose one-hot prediction is h.
  kPassthrough,
};

const char* injection_name(Injection injection);
Injection parse_injection(const std::string& name);

struct EnrichedGradients {
  Gradients trunk;
  Gradients film;
  Gradients head;

  void scale(double factor);
  void add(const EnrichedGradients& other);
};

class EnrichedNet {
 public:
  EnrichedNet() = default;

  static EnrichedNet concat(int x_dim, int h_dim, int hidden, int num_classes,
                            std::uint64_t seed);
  static EnrichedNet film(int x_dim, int h_dim, int hidden, int num_classes,
                          std::uint64_t seed);
  static EnrichedNet passthrough(int num_classes);

  Injection injection() const { return injection_; }
  int x_dim() const { return x_dim_; }
  int h_dim() const { return h_dim_; }
  int num_classes() const { return num_classes_; }
  bool trainable() const { return injection_ != Injection::kPassthrough; }

  std::vector<double> logits(std::span<const double> x,
                             std::span<const double> h) const;
  EnrichedGradients backward(std::span<const double> x,
                             std::span<const double> h,
                             std::span<const double> upstream) const;
  EnrichedGradients zero_gradients() const;
  void sgd_step(const EnrichedGradients& grads, const SgdConfig& cfg);
  bool all_finite() const;

  // Concat: the whole network on x ++ h. FiLM: the x -> hidden projection.
  DenseNet trunk;
  // FiLM only: h -> (gamma, beta), each of hidden width.
  DenseNet film_gen;
  // FiLM only: activated modulated hidden units -> logits.
  DenseNet head;
  Activation hidden_activation = Activation::kRelu;

  // Used by deserialization.
  void set_shape(Injection injection, int x_dim, int h_dim, int num_classes) {
    injection_ = injection;
    x_dim_ = x_dim;
    h_dim_ = h_dim;
    num_classes_ = num_classes;
  }

 private:
  Injection injection_ = Injection::kConcat;
  int x_dim_ = 0;
  int h_dim_ = 0;
  int num_classes_ = 0;
};

}  // namespace lta
