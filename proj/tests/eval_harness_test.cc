#include "lta/eval_harness.h"

#include <gtest/gtest.h>

#include "lta/errors.h"
#include "lta/experiment.h"
#include "lta/training.h"

namespace lta {
namespace {

// The 2-bit table once per split, with the true label as one-hot feedback.
TaskDataset toy_with_oracle_feedback() {
  const TaskDataset table = make_toy_table();
  TaskDataset ds = table;
  ds.samples.clear();
  ds.feedback_dim = 4;
  ds.feedback_mode = "ltd";
  for (Split sp : {Split::kTrain, Split::kCalibration, Split::kTest}) {
    for (LabeledSample s : table.samples) {
      s.split = sp;
      s.h.assign(4, 0.0);
      s.h[s.y] = 1.0;
      ds.samples.push_back(s);
    }
  }
  return ds;
}

// f reads x1 and softly predicts class 2*x1; g passes the feedback through.
ModelBundle toy_bundle() {
  DenseLayer layer;
  layer.in_dim = 1;
  layer.out_dim = 4;
  layer.weights = {-1.0, 0.0, 1.0, 0.0};
  layer.bias = {1.0, -10.0, 0.0, -10.0};
  ModelBundle b;
  b.method = Method::kLtd;
  b.num_classes = 4;
  b.f = DenseNet({layer});
  b.g = EnrichedNet::passthrough(4);
  return b;
}

TEST(Evaluate, ZeroBudgetIsFOnly) {
  const TaskDataset ds = toy_with_oracle_feedback();
  for (ScoreMode mode : {ScoreMode::kLossGap}) {
    const CoverageCurve c = evaluate(toy_bundle(), mode, ds, std::vector<double>{0.0});
    EXPECT_EQ(c.points[0].ask_rate, 0.0);
    EXPECT_EQ(c.points[0].system_accuracy, c.points[0].f_only_accuracy);
  }
}

TEST(Evaluate, FullBudgetWithPositiveGapIsG) {
  const TaskDataset ds = toy_with_oracle_feedback();
  const CoverageCurve c =
      evaluate(toy_bundle(), ScoreMode::kLossGap, ds, std::vector<double>{1.0});
  EXPECT_EQ(c.points[0].ask_rate, 1.0);
  EXPECT_EQ(c.points[0].system_accuracy, c.points[0].g_accuracy);
}

TEST(Evaluate, ToyCurveRisesFromHalfToOne) {
  const TaskDataset ds = toy_with_oracle_feedback();
  const CoverageCurve c =
      evaluate(toy_bundle(), ScoreMode::kLossGap, ds, default_beta_grid());
  ASSERT_EQ(c.points.size(), 11u);
  EXPECT_DOUBLE_EQ(c.points.front().system_accuracy, 0.5);
  EXPECT_DOUBLE_EQ(c.points.back().system_accuracy, 1.0);
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_GE(c.points[i].system_accuracy, c.points[i - 1].system_accuracy);
  }
  EXPECT_NO_THROW(c.validate());
}

TEST(Evaluate, TestLabelsAreReadOnlyAfterPredictions) {
  const TaskDataset ds = toy_with_oracle_feedback();
  EvalTrace trace;
  evaluate(toy_bundle(), ScoreMode::kLossGap, ds, default_beta_grid(), &trace);
  EXPECT_TRUE(trace.test_predictions_complete);
  EXPECT_FALSE(trace.test_label_read_before_predictions);
  EXPECT_EQ(trace.calibration_size, 4u);
  EXPECT_EQ(trace.test_size, 4u);
}

TEST(Evaluate, CalibrationAskRateRespectsBudget) {
  ExperimentConfig cfg;
  cfg.task = "synth";
  cfg.n = 1000;
  cfg.epochs = 20;
  cfg.pretrain_epochs = 10;
  const SeedContext ctx = build_context(cfg, 0, false);
  const ModelBundle b =
      train(ctx.lta_data, cfg.plan_for(Method::kLtaJoint, 0.0, 0));
  std::vector<double> cal;
  for (const LabeledSample& s : ctx.lta_data.samples) {
    if (s.split == Split::kCalibration) {
      cal.push_back(delta_score(b, ctx.lta_data, s, ScoreMode::kSelectorLogit));
    }
  }
  for (double beta : default_beta_grid()) {
    const SelectionPolicy p =
        fit_threshold(cal, beta, score_floor(ScoreMode::kSelectorLogit));
    std::size_t asked = 0;
    for (double v : cal) asked += p.select(v);
    EXPECT_LE(asked, budget_count(beta, cal.size()));
  }
}

TEST(Evaluate, PerfectExpertAtFullBudget) {
  ExperimentConfig cfg;
  cfg.task = "toy_table";
  TaskDataset ds = make_task(cfg, 0);
  const ExpertModel expert = fit_expert(ds, std::vector<int>{0, 1}, 2);
  materialize_feedback(ds, expert, FeedbackMode::kLtd, 0);
  const ModelBundle b = train(ds, cfg.plan_for(Method::kLtd, 0.0, 0));
  const CoverageCurve c =
      evaluate(b, ScoreMode::kSelectorLogit, ds, std::vector<double>{1.0});
  EXPECT_EQ(c.points[0].system_accuracy, expert_accuracy(ds, expert, 0, 1));
  EXPECT_EQ(c.points[0].system_accuracy, 1.0);
}

TEST(Evaluate, EmptySplitsAreConfigErrors) {
  TaskDataset ds = toy_with_oracle_feedback();
  for (LabeledSample& s : ds.samples) {
    if (s.split == Split::kCalibration) s.split = Split::kTrain;
  }
  EXPECT_THROW(evaluate(toy_bundle(), ScoreMode::kLossGap, ds, default_beta_grid()),
               ConfigError);
}

TEST(Evaluate, BadBetaGridIsConfigError) {
  const TaskDataset ds = toy_with_oracle_feedback();
  EXPECT_THROW(evaluate(toy_bundle(), ScoreMode::kLossGap, ds,
                        std::vector<double>{0.5, 0.2}),
               ConfigError);
  EXPECT_THROW(evaluate(toy_bundle(), ScoreMode::kLossGap, ds,
                        std::vector<double>{1.5}),
               ConfigError);
}

TEST(Complementarity, StrictlyAboveBothBaselines) {
  CoverageCurve c;
  CoveragePoint p;
  p.beta = 0.5;
  p.system_accuracy = 0.9;
  c.points.push_back(p);
  EXPECT_TRUE(complementarity(c, 0.8, 0.85).any());
  c.points[0].system_accuracy = 0.85;
  const ComplementarityReport r = complementarity(c, 0.8, 0.85);
  EXPECT_FALSE(r.any());
  EXPECT_EQ(r.best_margin, 0.0);
}

TEST(CoverageCurveValidate, RejectsUnorderedBetas) {
  CoverageCurve c;
  CoveragePoint a;
  a.beta = 0.5;
  CoveragePoint b;
  b.beta = 0.5;
  c.points = {a, b};
  EXPECT_THROW(c.validate(), DataError);
}

}  // namespace
}  // namespace lta
