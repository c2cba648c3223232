#pragma once

// Finite-difference helpers shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lta/enriched_net.h"
#include "lta/nn_core.h"

namespace lta::testing {

// Parameter addresses in the same order as flatten(Gradients).
inline void collect(DenseNet& net, std::vector<double*>& out) {
  for (DenseLayer& layer : net.mutable_layers()) {
    for (double& w : layer.weights) out.push_back(&w);
    for (double& b : layer.bias) out.push_back(&b);
  }
}

inline void collect(EnrichedNet& net, std::vector<double*>& out) {
  collect(net.trunk, out);
  collect(net.film_gen, out);
  collect(net.head, out);
}

inline void flatten(const Gradients& g, std::vector<double>& out) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    out.insert(out.end(), g.weights[l].begin(), g.weights[l].end());
    out.insert(out.end(), g.bias[l].begin(), g.bias[l].end());
  }
}

inline void flatten(const EnrichedGradients& g, std::vector<double>& out) {
  flatten(g.trunk, out);
  flatten(g.film, out);
  flatten(g.head, out);
}

// Central differences of `loss` w.r.t. every parameter in `params`.
inline std::vector<double> numeric_gradient(const std::vector<double*>& params,
                                            const std::function<double()>& loss,
                                            double step = 1e-5) {
  std::vector<double> out;
  out.reserve(params.size());
  for (double* p : params) {
    const double saved = *p;
    *p = saved + step;
    const double up = loss();
    *p = saved - step;
    const double down = loss();
    *p = saved;
    out.push_back((up - down) / (2.0 * step));
  }
  return out;
}

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a,
                             const std::vector<double>& b) {
  double diff = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

// True when some relu pre-activation of `net` at `x` lies within `margin`
// of the kink, where finite differences are unreliable.
inline bool near_relu_kink(const DenseNet& net, std::span<const double> x,
                           double margin = 1e-4) {
  const ForwardCache cache = forward_cached(net, x);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].activation != Activation::kRelu) continue;
    for (double v : cache.pre_activations[l]) {
      if (std::abs(v) < margin) return true;
    }
  }
  return false;
}

}  // namespace lta::testing
