#include "lta/enriched_net.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "lta/errors.h"
#include "lta/random.h"

namespace lta {
namespace {

constexpr double kPassthroughFloor = 1e-12;

double act(Activation a, double v) {
  switch (a) {
    case Activation::kRelu:
      return v > 0 ? v : 0.0;
    case Activation::kTanh:
      return std::tanh(v);
    case Activation::kIdentity:
      break;
  }
  return v;
}

double act_grad(Activation a, double pre, double out) {
  switch (a) {
    case Activation::kRelu:
      return pre > 0 ? 1.0 : 0.0;
    case Activation::kTanh:
      return 1.0 - out * out;
    case Activation::kIdentity:
      break;
  }
  return 1.0;
}

void check_dims(const EnrichedNet& net, std::span<const double> x,
                std::span<const double> h) {
  if (static_cast<int>(x.size()) != net.x_dim() ||
      static_cast<int>(h.size()) != net.h_dim()) {
    throw DataError("enriched net expects x/h of size " +
                    std::to_string(net.x_dim()) + "/" +
                    std::to_string(net.h_dim()) + ", got " +
                    std::to_string(x.size()) + "/" + std::to_string(h.size()));
  }
}

std::vector<double> concat_input(std::span<const double> x,
                                 std::span<const double> h) {
  std::vector<double> in(x.begin(), x.end());
  in.insert(in.end(), h.begin(), h.end());
  return in;
}

struct FilmForward {
  ForwardCache trunk;
  ForwardCache film;
  std::vector<double> pre;  // modulated pre-activation u
  std::vector<double> act;  // act(u)
  ForwardCache head;
};

FilmForward film_forward(const EnrichedNet& net, std::span<const double> x,
                         std::span<const double> h) {
  FilmForward f;
  f.trunk = forward_cached(net.trunk, x);
  f.film = forward_cached(net.film_gen, h);
  const std::vector<double>& z = f.trunk.output();
  const std::vector<double>& m = f.film.output();
  const std::size_t width = z.size();
  f.pre.resize(width);
  f.act.resize(width);
  for (std::size_t k = 0; k < width; ++k) {
    f.pre[k] = (1.0 + m[k]) * z[k] + m[width + k];
    f.act[k] = act(net.hidden_activation, f.pre[k]);
  }
  f.head = forward_cached(net.head, f.act);
  return f;
}

}  // namespace

const char* injection_name(Injection injection) {
  switch (injection) {
    case Injection::kConcat:
      return "concat";
    case Injection::kFilm:
      return "film";
    case Injection::kPassthrough:
      return "passthrough";
  }
  return "?";
}

Injection parse_injection(const std::string& name) {
  if (name == "concat") return Injection::kConcat;
  if (name == "film") return Injection::kFilm;
  if (name == "passthrough") return Injection::kPassthrough;
  throw ConfigError("unknown injection '" + name + "'");
}

void EnrichedGradients::scale(double factor) {
  trunk.scale(factor);
  film.scale(factor);
  head.scale(factor);
}

void EnrichedGradients::add(const EnrichedGradients& other) {
  trunk.add(other.trunk);
  film.add(other.film);
  head.add(other.head);
}

EnrichedNet EnrichedNet::concat(int x_dim, int h_dim, int hidden,
                                int num_classes, std::uint64_t seed) {
  EnrichedNet net;
  net.set_shape(Injection::kConcat, x_dim, h_dim, num_classes);
  const std::array<int, 3> dims{x_dim + h_dim, hidden, num_classes};
  net.trunk = DenseNet::create(dims, net.hidden_activation, seed);
  return net;
}

EnrichedNet EnrichedNet::film(int x_dim, int h_dim, int hidden,
                              int num_classes, std::uint64_t seed) {
  EnrichedNet net;
  net.set_shape(Injection::kFilm, x_dim, h_dim, num_classes);
  const std::array<int, 2> trunk_dims{x_dim, hidden};
  const std::array<int, 2> film_dims{h_dim, 2 * hidden};
  const std::array<int, 2> head_dims{hidden, num_classes};
  net.trunk = DenseNet::create(trunk_dims, Activation::kIdentity,
                               derive_seed(seed, 0));
  net.film_gen = DenseNet::create(film_dims, Activation::kIdentity,
                                  derive_seed(seed, 1));
  // Start from the identity modulation (gamma = beta = 0).
  for (double& w : net.film_gen.mutable_layers()[0].weights) w *= 0.1;
  net.head = DenseNet::create(head_dims, Activation::kIdentity,
                              derive_seed(seed, 2));
  return net;
}

EnrichedNet EnrichedNet::passthrough(int num_classes) {
  EnrichedNet net;
  net.set_shape(Injection::kPassthrough, 0, num_classes, num_classes);
  return net;
}

std::vector<double> EnrichedNet::logits(std::span<const double> x,
                                        std::span<const double> h) const {
  switch (injection_) {
    case Injection::kPassthrough: {
      if (static_cast<int>(h.size()) != h_dim_) {
        throw DataError("passthrough expects feedback of size " +
                        std::to_string(h_dim_));
      }
      std::vector<double> out(h.size());
      for (std::size_t k = 0; k < h.size(); ++k) {
        out[k] = std::log(std::max(h[k], kPassthroughFloor));
      }
      return out;
    }
    case Injection::kConcat:
      check_dims(*this, x, h);
      return forward(trunk, concat_input(x, h));
    case Injection::kFilm:
      check_dims(*this, x, h);
      return film_forward(*this, x, h).head.output();
  }
  return {};
}

EnrichedGradients EnrichedNet::zero_gradients() const {
  EnrichedGradients g;
  g.trunk = trunk.zero_gradients();
  g.film = film_gen.zero_gradients();
  g.head = head.zero_gradients();
  return g;
}

EnrichedGradients EnrichedNet::backward(std::span<const double> x,
                                        std::span<const double> h,
                                        std::span<const double> upstream) const {
  EnrichedGradients g = zero_gradients();
  switch (injection_) {
    case Injection::kPassthrough:
      return g;
    case Injection::kConcat:
      check_dims(*this, x, h);
      g.trunk = lta::backward(trunk, concat_input(x, h), upstream).grads;
      return g;
    case Injection::kFilm: {
      check_dims(*this, x, h);
      const FilmForward f = film_forward(*this, x, h);
      BackwardResult head_back = lta::backward(head, f.head, upstream);
      const std::vector<double>& z = f.trunk.output();
      const std::vector<double>& m = f.film.output();
      const std::size_t width = z.size();
      std::vector<double> dz(width);
      std::vector<double> dm(2 * width);
      for (std::size_t k = 0; k < width; ++k) {
        const double du = head_back.input_grad[k] *
                          act_grad(hidden_activation, f.pre[k], f.act[k]);
        dz[k] = (1.0 + m[k]) * du;
        dm[k] = z[k] * du;
        dm[width + k] = du;
      }
      g.head = std::move(head_back.grads);
      g.trunk = lta::backward(trunk, f.trunk, dz).grads;
      g.film = lta::backward(film_gen, f.film, dm).grads;
      return g;
    }
  }
  return g;
}

void EnrichedNet::sgd_step(const EnrichedGradients& grads,
                           const SgdConfig& cfg) {
  if (!trainable()) return;
  lta::sgd_step(trunk, grads.trunk, cfg);
  if (injection_ == Injection::kFilm) {
    lta::sgd_step(film_gen, grads.film, cfg);
    lta::sgd_step(head, grads.head, cfg);
  }
}

bool EnrichedNet::all_finite() const {
  return trunk.all_finite() && film_gen.all_finite() && head.all_finite();
}

}  // namespace lta
