#include "lta/eval_harness.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "lta/errors.h"
#include "lta/nn_core.h"

namespace lta {
namespace {

// Test-time outputs, computed before any test label is touched.
struct SplitPredictions {
  std::vector<std::size_t> rows;
  std::vector<int> f_pred;
  std::vector<int> g_pred;
  std::vector<double> score;
};

SplitPredictions predict_split(const ModelBundle& bundle, ScoreMode mode,
                               const TaskDataset& ds, Split split) {
  SplitPredictions p;
  p.rows = ds.indices(split);
  for (std::size_t r : p.rows) {
    const LabeledSample& s = ds.samples[r];
    p.f_pred.push_back(argmax(bundle.f_logits(ds, s)));
    p.g_pred.push_back(argmax(bundle.g_logits(ds, s)));
    p.score.push_back(delta_score(bundle, ds, s, mode));
  }
  return p;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void CoverageCurve::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const CoveragePoint& p = points[i];
    if (i > 0 && !(p.beta > points[i - 1].beta)) {
      throw DataError("coverage curve betas must be strictly increasing");
    }
    if (!in_unit(p.beta) || !in_unit(p.coverage) || !in_unit(p.ask_rate) ||
        !in_unit(p.system_accuracy) || !in_unit(p.f_only_accuracy) ||
        !in_unit(p.g_accuracy)) {
      throw DataError("coverage point rate outside [0,1]");
    }
  }
}

std::vector<double> default_beta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

double score_floor(ScoreMode mode) {
  return mode == ScoreMode::kLossGap ? 0.0
                                     : -std::numeric_limits<double>::infinity();
}

CoverageCurve evaluate(const ModelBundle& bundle, ScoreMode mode,
                       const TaskDataset& ds, std::span<const double> beta_grid,
                       EvalTrace* trace) {
  EvalTrace local;
  EvalTrace& t = trace ? *trace : local;
  if (ds.count(Split::kCalibration) == 0 || ds.count(Split::kTest) == 0) {
    throw ConfigError("evaluation needs non-empty calibration and test splits");
  }
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    if (!in_unit(beta_grid[i]) || (i > 0 && !(beta_grid[i] > beta_grid[i - 1]))) {
      throw ConfigError("beta grid must be strictly increasing within [0,1]");
    }
  }

  const SplitPredictions cal = predict_split(bundle, mode, ds, Split::kCalibration);
  const SplitPredictions test = predict_split(bundle, mode, ds, Split::kTest);
  t.test_predictions_complete = true;
  t.calibration_size = cal.rows.size();
  t.test_size = test.rows.size();

  auto test_label = [&](std::size_t k) {
    if (!t.test_predictions_complete) t.test_label_read_before_predictions = true;
    return ds.samples[test.rows[k]].y;
  };

  std::vector<int> labels(test.rows.size());
  std::vector<double> weights(test.rows.size());
  double total_weight = 0.0;
  for (std::size_t k = 0; k < test.rows.size(); ++k) {
    labels[k] = test_label(k);
    weights[k] = ds.samples[test.rows[k]].weight;
    total_weight += weights[k];
  }
  double f_correct = 0.0;
  double g_correct = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    f_correct += weights[k] * (test.f_pred[k] == labels[k]);
    g_correct += weights[k] * (test.g_pred[k] == labels[k]);
  }

  CoverageCurve curve;
  curve.method = method_name(bundle.method);
  curve.seed = bundle.data_seed;
  curve.delta = bundle.plan.cost.delta;
  const double floor = score_floor(mode);
  for (double beta : beta_grid) {
    const SelectionPolicy policy = fit_threshold(cal.score, beta, floor);
    double asked = 0.0;
    double correct = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      const bool ask = policy.select(test.score[k]);
      asked += weights[k] * ask;
      const int pred = ask ? test.g_pred[k] : test.f_pred[k];
      correct += weights[k] * (pred == labels[k]);
    }
    CoveragePoint p;
    p.beta = beta;
    p.tau = policy.tau;
    p.ask_rate = asked / total_weight;
    p.coverage = 1.0 - p.ask_rate;
    p.system_accuracy = correct / total_weight;
    p.f_only_accuracy = f_correct / total_weight;
    p.g_accuracy = g_correct / total_weight;
    curve.points.push_back(p);
  }
  return curve;
}

ComplementarityReport complementarity(const CoverageCurve& curve,
                                      double expert_alone,
                                      double machine_alone) {
  ComplementarityReport report;
  const double best_single = std::max(expert_alone, machine_alone);
  for (const CoveragePoint& p : curve.points) {
    const double margin = p.system_accuracy - best_single;
    report.best_margin = std::max(report.best_margin, margin);
    if (margin > 0.0) report.complementary_betas.push_back(p.beta);
  }
  return report;
}

}  // namespace lta
