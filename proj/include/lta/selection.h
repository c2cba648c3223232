#pragma once

// Budget-constrained selection: the loss-gap score, the calibration
// quantile threshold and exhaustive/oracle selectors used to validate it.

#include <span>
#include <string>
#include <vector>

#include "lta/datagen.h"
#include "lta/model_bundle.h"

namespace lta {

enum class ScoreMode {
  // Plug-in estimate of E[l_f] - E[l_g] from the models' own probabilities.
  kLossGap,
  // The trained selector logit s~.
  kSelectorLogit,
};

const char* score_mode_name(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& name);

enum class PluginLoss { kMae, kZeroOne, kCe };

// E_{y ~ probs}[loss(probs, y)]: 1 - sum p^2 for MAE, 1 - max p for 0-1,
// entropy for CE.
double plugin_risk(std::span<const double> probs, PluginLoss loss);

double delta_score(const ModelBundle& bundle, const TaskDataset& ds,
                   const LabeledSample& sample, ScoreMode mode,
                   PluginLoss loss = PluginLoss::kMae);

struct SelectionPolicy {
  double tau = 0.0;
  double beta = 0.0;

  // Strict: a score equal to tau does not ask.
  bool select(double score) const { return score > tau; }
};

// Smallest lambda >= floor, among {floor} and the observed scores, such that
// the fraction of scores strictly above lambda is at most beta. With the
// default floor of 0, non-positive scores never ask.
SelectionPolicy fit_threshold(std::span<const double> scores, double beta,
                              double floor = 0.0);

inline bool select(const SelectionPolicy& policy, double score) {
  return policy.select(score);
}

// Label-aware LtD oracle on realized predictions: defer only when the
// expert is right and the machine is wrong.
bool oracle_select_ltd(int f_pred, int expert_pred, int y);

// Expected-accuracy oracle: given the probability each agent assigns to the
// true label (the accuracy of a randomized Bayes predictor), pick the
// better agent; ties stay with the first.
double oracle_expected_accuracy(double p_first_correct,
                                double p_second_correct);

// Exhaustive 2^n search for the selection minimizing sum of
// (1-s) l_f + s l_g subject to sum s <= floor(beta n). n <= 20.
std::vector<int> brute_force_budget_select(std::span<const double> losses_f,
                                           std::span<const double> losses_g,
                                           double beta);

// Total risk of a selection vector.
double selection_risk(std::span<const int> selection,
                      std::span<const double> losses_f,
                      std::span<const double> losses_g);

// floor(beta * n) with a tolerance for beta values like 0.3 * 10.
std::size_t budget_count(double beta, std::size_t n);

}  // namespace lta
