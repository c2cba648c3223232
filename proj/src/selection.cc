#include "lta/selection.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "lta/errors.h"
#include "lta/nn_core.h"

namespace lta {

const char* score_mode_name(ScoreMode mode) {
  return mode == ScoreMode::kLossGap ? "loss_gap" : "selector_logit";
}

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "loss_gap") return ScoreMode::kLossGap;
  if (name == "selector_logit") return ScoreMode::kSelectorLogit;
  throw ConfigError("unknown score mode '" + name + "'");
}

double plugin_risk(std::span<const double> probs, PluginLoss loss) {
  switch (loss) {
    case PluginLoss::kMae: {
      double sq = 0.0;
      for (double p : probs) sq += p * p;
      return 1.0 - sq;
    }
    case PluginLoss::kZeroOne:
      return 1.0 - *std::max_element(probs.begin(), probs.end());
    case PluginLoss::kCe: {
      double h = 0.0;
      for (double p : probs) {
        if (p > 0) h -= p * std::log(p);
      }
      return h;
    }
  }
  return 0.0;
}

double delta_score(const ModelBundle& bundle, const TaskDataset& ds,
                   const LabeledSample& sample, ScoreMode mode,
                   PluginLoss loss) {
  if (mode == ScoreMode::kSelectorLogit) return bundle.s_logit(ds, sample);
  if (static_cast<int>(sample.h.size()) != ds.feedback_dim ||
      sample.h.empty()) {
    throw DataError("loss-gap score needs materialized feedback");
  }
  const std::vector<double> pf = softmax(bundle.f_logits(ds, sample));
  const std::vector<double> pg = softmax(bundle.g_logits(ds, sample));
  return plugin_risk(pf, loss) - plugin_risk(pg, loss);
}

std::size_t budget_count(double beta, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(beta * static_cast<double>(n) + 1e-9));
}

SelectionPolicy fit_threshold(std::span<const double> scores, double beta,
                              double floor) {
  if (scores.empty()) throw ConfigError("cannot fit a threshold on no scores");
  if (!(beta >= 0 && beta <= 1)) throw ConfigError("beta must lie in [0,1]");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t allowed = budget_count(beta, sorted.size());
  const auto above_floor = static_cast<std::size_t>(std::count_if(
      sorted.begin(), sorted.end(), [floor](double s) { return s > floor; }));
  SelectionPolicy policy;
  policy.beta = beta;
  // Only the `allowed` largest scores may lie strictly above tau, so the
  // infimum is the next one down; ties with it are not asked.
  policy.tau = above_floor <= allowed ? floor : sorted[allowed];
  return policy;
}

bool oracle_select_ltd(int f_pred, int expert_pred, int y) {
  return expert_pred == y && f_pred != y;
}

double oracle_expected_accuracy(double p_first_correct,
                                double p_second_correct) {
  return std::max(p_first_correct, p_second_correct);
}

double selection_risk(std::span<const int> selection,
                      std::span<const double> losses_f,
                      std::span<const double> losses_g) {
  double total = 0.0;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    total += selection[i] ? losses_g[i] : losses_f[i];
  }
  return total;
}

std::vector<int> brute_force_budget_select(std::span<const double> losses_f,
                                           std::span<const double> losses_g,
                                           double beta) {
  const std::size_t n = losses_f.size();
  if (losses_g.size() != n) throw DataError("loss vectors differ in length");
  if (n > 20) throw ConfigError("brute-force selection limited to n <= 20");
  const std::size_t allowed = budget_count(beta, n);
  std::vector<int> best(n, 0);
  double best_risk = std::numeric_limits<double>::infinity();
  std::vector<int> current(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) > allowed) continue;
    for (std::size_t i = 0; i < n; ++i) current[i] = (mask >> i) & 1u;
    const double risk = selection_risk(current, losses_f, losses_g);
    if (risk < best_risk) {
      best_risk = risk;
      best = current;
    }
  }
  return best;
}

}  // namespace lta
