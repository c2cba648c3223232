#include "lta/losses.h"

#include <cmath>
#include <string>

#include "lta/errors.h"
#include "lta/nn_core.h"

namespace lta {
namespace {

double capped_neg_log(double p) {
  return -std::log(std::max(p, kCrossEntropyFloor));
}

void check_label(std::span<const double> logits, int y) {
  if (y < 0 || y >= static_cast<int>(logits.size())) {
    throw DataError("label " + std::to_string(y) + " out of range for " +
                    std::to_string(logits.size()) + " logits");
  }
}

}  // namespace

void DeferCost::validate() const {
  if (!(alpha >= 0 && alpha <= 1)) throw ConfigError("alpha must lie in [0,1]");
  if (!(delta >= 0 && delta <= 1)) throw ConfigError("delta must lie in [0,1]");
}

const char* surrogate_name(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kMae:
      return "mae";
    case SurrogateKind::kCe:
      return "ce";
    case SurrogateKind::kZeroOne:
      return "zero_one";
  }
  return "?";
}

SurrogateKind parse_surrogate(const std::string& name) {
  if (name == "mae") return SurrogateKind::kMae;
  if (name == "ce") return SurrogateKind::kCe;
  if (name == "zero_one" || name == "01") return SurrogateKind::kZeroOne;
  throw ConfigError("unknown loss '" + name + "'");
}

double ltd_01(int f_pred, bool ask, int expert_pred, int y,
              const DeferCost& cost) {
  if (!ask) return f_pred != y ? 1.0 : 0.0;
  return cost.alpha * (expert_pred != y ? 1.0 : 0.0) + cost.delta;
}

LossValue ltd_ce_surrogate(std::span<const double> f_logits, double s,
                           std::span<const double> expert_probs, int y,
                           const DeferCost& cost) {
  check_label(f_logits, y);
  if (expert_probs.size() != f_logits.size()) {
    throw DataError("expert vector and logits differ in size");
  }
  const LossValue ce_f = ce_loss(f_logits, y);
  const double ce_e = cost.alpha * capped_neg_log(expert_probs[y]) + cost.delta;
  LossValue out;
  out.value = (1.0 - s) * ce_f.value + s * ce_e;
  std::vector<double> grad = *ce_f.grad_f;
  for (double& g : grad) g *= (1.0 - s);
  out.grad_f = std::move(grad);
  out.grad_s = ce_e - ce_f.value;
  return out;
}

double lta_01(int f_pred, int g_pred, bool ask, int y) {
  return ask ? (g_pred != y ? 1.0 : 0.0) : (f_pred != y ? 1.0 : 0.0);
}

LossValue lta_surrogate(std::span<const double> f_logits,
                        std::span<const double> g_logits, bool ask, int y,
                        SurrogateKind lf, SurrogateKind lg) {
  const LossValue f = surrogate_loss(lf, f_logits, y);
  const LossValue g = surrogate_loss(lg, g_logits, y);
  const double wf = ask ? 0.0 : 1.0;
  const double wg = ask ? 1.0 : 0.0;
  LossValue out;
  out.value = wf * f.value + wg * g.value;
  if (f.grad_f) {
    std::vector<double> grad = *f.grad_f;
    for (double& v : grad) v *= wf;
    out.grad_f = std::move(grad);
  }
  if (g.grad_f) {
    std::vector<double> grad = *g.grad_f;
    for (double& v : grad) v *= wg;
    out.grad_g = std::move(grad);
  }
  return out;
}

LossValue mae_loss(std::span<const double> logits, int y) {
  check_label(logits, y);
  const std::vector<double> p = softmax(logits);
  LossValue out;
  out.value = 1.0 - p[y];
  // d(-p_y)/dz_k = -p_y (1{k=y} - p_k)
  std::vector<double> grad(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    grad[k] = -p[y] * ((static_cast<int>(k) == y ? 1.0 : 0.0) - p[k]);
  }
  out.grad_f = std::move(grad);
  return out;
}

LossValue ce_loss(std::span<const double> logits, int y) {
  check_label(logits, y);
  const std::vector<double> p = softmax(logits);
  LossValue out;
  // log-sum-exp form keeps the value finite for very negative true logits.
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  out.value = std::log(sum) + mx - logits[y];
  std::vector<double> grad(p);
  grad[y] -= 1.0;
  out.grad_f = std::move(grad);
  return out;
}

LossValue zero_one_loss(std::span<const double> logits, int y) {
  check_label(logits, y);
  LossValue out;
  out.value = argmax(logits) != y ? 1.0 : 0.0;
  return out;
}

LossValue surrogate_loss(SurrogateKind kind, std::span<const double> logits,
                         int y) {
  switch (kind) {
    case SurrogateKind::kMae:
      return mae_loss(logits, y);
    case SurrogateKind::kCe:
      return ce_loss(logits, y);
    case SurrogateKind::kZeroOne:
      return zero_one_loss(logits, y);
  }
  return {};
}

LossValue sig_loss(double s_logit) {
  const double t = std::tanh(s_logit);
  LossValue out;
  out.value = 0.5 * (1.0 - t);
  out.grad_s = -0.5 * (1.0 - t * t);
  return out;
}

LossValue joint_surrogate(std::span<const double> f_logits,
                          std::span<const double> g_logits, double s_logit,
                          int y, const DeferCost& cost) {
  const LossValue lf = mae_loss(f_logits, y);
  const LossValue lg = mae_loss(g_logits, y);
  const LossValue wf = sig_loss(s_logit);
  const LossValue wg = sig_loss(-s_logit);
  const double g_branch = lg.value + cost.delta;

  LossValue out;
  out.value = lf.value * wf.value + g_branch * wg.value;
  std::vector<double> gf = *lf.grad_f;
  for (double& v : gf) v *= wf.value;
  std::vector<double> gg = *lg.grad_f;
  for (double& v : gg) v *= wg.value;
  out.grad_f = std::move(gf);
  out.grad_g = std::move(gg);
  // d sig(-s)/ds = -sig'(-s)
  out.grad_s = lf.value * *wf.grad_s - g_branch * *wg.grad_s;
  return out;
}

}  // namespace lta
