#include "lta/expert_sim.h"

#include <gtest/gtest.h>

#include "lta/errors.h"

namespace lta {
namespace {

double weighted_accuracy(const TaskDataset& ds, const ExpertModel& e) {
  Rng rng(0);
  double hit = 0.0;
  double mass = 0.0;
  for (const LabeledSample& s : ds.samples) {
    hit += s.weight * (expert_predict(e, s, rng) == s.y);
    mass += s.weight;
  }
  return hit / mass;
}

double test_accuracy(const TaskDataset& ds, const ExpertModel& e) {
  Rng rng(0);
  int hit = 0;
  int n = 0;
  for (const LabeledSample& s : ds.samples) {
    if (s.split != Split::kTest) continue;
    hit += expert_predict(e, s, rng) == s.y;
    ++n;
  }
  return static_cast<double>(hit) / n;
}

TEST(Tree, ToyTableAllFeaturesIsPerfect) {
  const TaskDataset ds = make_toy_table();
  const ExpertModel e = fit_expert(ds, std::vector<int>{0, 1}, 2);
  EXPECT_DOUBLE_EQ(weighted_accuracy(ds, e), 1.0);
}

TEST(Tree, ToyTableSingleFeatureIsHalf) {
  const TaskDataset ds = make_toy_table();
  EXPECT_DOUBLE_EQ(weighted_accuracy(ds, fit_expert(ds, std::vector<int>{0}, 3)), 0.5);
  EXPECT_DOUBLE_EQ(weighted_accuracy(ds, fit_expert(ds, std::vector<int>{1}, 3)), 0.5);
}

TEST(Tree, ReadsOnlyDeclaredFeatures) {
  const TaskDataset ds = split(make_synth(2, 2000), SplitRatios{}, 2);
  const ExpertModel e = fit_expert(ds, std::vector<int>{2, 3}, 3);
  for (const TreeNode& n : e.tree.nodes) {
    if (n.feature >= 0) EXPECT_TRUE(n.feature == 2 || n.feature == 3);
  }
  // Scrambling the machine columns leaves every prediction unchanged.
  Rng rng(0);
  for (const LabeledSample& s : ds.samples) {
    LabeledSample t = s;
    t.x[0] = -7.0;
    t.x[1] = 11.0;
    EXPECT_EQ(expert_predict(e, s, rng), expert_predict(e, t, rng));
  }
  EXPECT_LE(e.tree.depth(), 3);
}

TEST(Tree, SynthExpertBetweenChanceAndPerfect) {
  const TaskDataset ds = split(make_synth(5, 4000), SplitRatios{}, 5);
  const double acc = test_accuracy(ds, fit_expert(ds, std::vector<int>{2, 3}, 3));
  EXPECT_GT(acc, 0.25);
  EXPECT_LT(acc, 1.0);
}

TEST(Tree, EmptyTrainingSplitIsConfigError) {
  TaskDataset ds = make_toy_table();
  for (LabeledSample& s : ds.samples) s.split = Split::kTest;
  EXPECT_THROW(fit_expert(ds, std::vector<int>{0}, 2), ConfigError);
}

TEST(Consensus, LabelFromProbabilities) {
  Rng rng(3);
  const std::vector<double> none{0, 0, 0, 0};
  const std::vector<double> first{1, 0, 0, 0};
  const std::vector<double> half{0.5, 0, 0, 0};
  int healthy = 0;
  for (int i = 0; i < 10000; ++i) {
    EXPECT_EQ(sample_consensus_label(none, rng), 1);
    EXPECT_EQ(sample_consensus_label(first, rng), 0);
    healthy += sample_consensus_label(half, rng);
  }
  EXPECT_NEAR(healthy / 10000.0, 0.5, 0.02);
}

TEST(Feedback, LtdIsOneHot) {
  TaskDataset ds = make_toy_table();
  const ExpertModel e = fit_expert(ds, std::vector<int>{0, 1}, 2);
  Rng rng(0);
  const LabeledSample& s = ds.samples[2];  // y = 2
  const std::vector<double> h = make_feedback(e, FeedbackMode::kLtd, s, rng);
  EXPECT_EQ(h, (std::vector<double>{0, 0, 1, 0}));
  EXPECT_EQ(feedback_dim(e, FeedbackMode::kLtd), 4);
}

TEST(Feedback, UncIsConsensusVector) {
  LabeledSample s;
  s.consensus = {0.25, 0.0, 1.0, 0.5};
  Rng rng(0);
  const ExpertModel e = consensus_expert(4);
  EXPECT_EQ(make_feedback(e, FeedbackMode::kUnc, s, rng), s.consensus);
  EXPECT_EQ(feedback_dim(e, FeedbackMode::kUnc), 4);
}

TEST(Feedback, FeatureRevealsExpertColumn) {
  const TaskDataset ds = make_toy_table();
  const ExpertModel e = oracle_feature_expert(ds, std::vector<int>{1}, 2);
  Rng rng(0);
  for (const LabeledSample& s : ds.samples) {
    EXPECT_EQ(make_feedback(e, FeedbackMode::kFeature, s, rng),
              std::vector<double>{s.x[1]});
  }
  EXPECT_EQ(feedback_dim(e, FeedbackMode::kFeature), 1);
}

TEST(Feedback, IncompatibleModesAreConfigErrors) {
  const TaskDataset ds = make_toy_table();
  EXPECT_THROW(feedback_dim(fit_expert(ds, std::vector<int>{1}, 2), FeedbackMode::kUnc),
               ConfigError);
  EXPECT_THROW(feedback_dim(consensus_expert(4), FeedbackMode::kFeature),
               ConfigError);
}

TEST(Feedback, MaterializeRecordsModeAndDim) {
  TaskDataset ds = make_toy_table();
  const ExpertModel e = fit_expert(ds, std::vector<int>{1}, 2);
  materialize_feedback(ds, e, FeedbackMode::kLtd, 1);
  EXPECT_EQ(ds.feedback_mode, "ltd");
  EXPECT_EQ(ds.feedback_dim, 4);
  for (const LabeledSample& s : ds.samples) EXPECT_EQ(s.h.size(), 4u);
  EXPECT_NO_THROW(ds.validate());
}

}  // namespace
}  // namespace lta
