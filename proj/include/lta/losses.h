#pragma once

// Deferral and ask losses with exact logit-gradients.
//
// Conventions: `ask` / s = 1 routes the instance to the expert (LtD) or to
// the enriched predictor g (LtA). The selector logit s~ asks iff s~ > 0.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lta {

struct DeferCost {
  double alpha = 1.0;
  double delta = 0.0;

  void validate() const;
};

struct LossValue {
  double value = 0.0;
  std::optional<std::vector<double>> grad_f;
  std::optional<std::vector<double>> grad_g;
  // Derivative w.r.t. the selector input (s for the CE mixture, s~ for SIG
  // and the joint surrogate).
  std::optional<double> grad_s;
};

// Cap applied to -log(p) when p is zero, e.g. CE against a wrong one-hot
// expert: -log(1e-12).
inline constexpr double kCrossEntropyFloor = 1e-12;

enum class SurrogateKind { kMae, kCe, kZeroOne };

const char* surrogate_name(SurrogateKind kind);
SurrogateKind parse_surrogate(const std::string& name);

double ltd_01(int f_pred, bool ask, int expert_pred, int y,
              const DeferCost& cost);

// (1-s) * CE(softmax(f_logits), y) + s * (alpha * CE(expert_probs, y) + delta)
LossValue ltd_ce_surrogate(std::span<const double> f_logits, double s,
                           std::span<const double> expert_probs, int y,
                           const DeferCost& cost = {});

double lta_01(int f_pred, int g_pred, bool ask, int y);

// l_f(f, y) * (1 - s) + l_g(g, y) * s with pluggable per-model surrogates.
LossValue lta_surrogate(std::span<const double> f_logits,
                        std::span<const double> g_logits, bool ask, int y,
                        SurrogateKind lf, SurrogateKind lg);

// 1 - softmax(logits)[y].
LossValue mae_loss(std::span<const double> logits, int y);
// -log softmax(logits)[y].
LossValue ce_loss(std::span<const double> logits, int y);
// 1{argmax(logits) != y}; no gradient.
LossValue zero_one_loss(std::span<const double> logits, int y);
LossValue surrogate_loss(SurrogateKind kind, std::span<const double> logits,
                         int y);

// 1/2 (1 - tanh(s~)).
LossValue sig_loss(double s_logit);

// mae(f, y) * sig(s~) + (mae(g, y) + delta) * sig(-s~).
//
// sig(s~) -> 1 as s~ -> -inf, so a strongly negative selector logit puts all
// weight on f and a strongly positive one on g, matching s = 1{s~ > 0}.
LossValue joint_surrogate(std::span<const double> f_logits,
                          std::span<const double> g_logits, double s_logit,
                          int y, const DeferCost& cost = {});

}  // namespace lta
