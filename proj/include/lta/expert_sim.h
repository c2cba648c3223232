#pragma once

// Simulated experts and the feedback vectors they provide.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lta/datagen.h"
#include "lta/random.h"

namespace lta {

struct TreeNode {
  // -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = 0;
};

// Axis-aligned classification tree. Internal nodes route x[feature] <=
// threshold to `left`. Feature indices refer to the full input vector.
struct DecisionTree {
  int input_dim = 0;
  int num_classes = 0;
  std::vector<int> features;
  std::vector<TreeNode> nodes;

  int predict(std::span<const double> x) const;
  int depth() const;
};

// Greedy top-down Gini tree on the given rows and feature subset. Ties in
// the majority vote go to the lowest class index.
DecisionTree fit_tree(std::span<const std::vector<double>> xs,
                      std::span<const int> ys, std::span<const double> weights,
                      int num_classes, std::span<const int> features,
                      int max_depth);

enum class FeedbackMode { kLtd, kUnc, kFeature };

const char* feedback_name(FeedbackMode mode);
FeedbackMode parse_feedback(const std::string& name);

struct ExpertModel {
  enum class Kind { kFeatureSubsetTree, kBernoulliConsensus, kOracleFeature };

  Kind kind = Kind::kFeatureSubsetTree;
  int num_classes = 0;
  // kFeatureSubsetTree and kOracleFeature.
  DecisionTree tree;
  // kOracleFeature: raw features handed over as feedback.
  std::vector<int> feature_indices;
  // kBernoulliConsensus.
  int num_conditions = 0;
};

const char* expert_kind_name(ExpertModel::Kind kind);
ExpertModel::Kind parse_expert_kind(const std::string& name);

// Fits a tree expert on the training split using only `feature_indices`.
ExpertModel fit_expert(const TaskDataset& ds,
                       std::span<const int> feature_indices, int max_depth);

// An expert that reveals the given raw features. Its label prediction comes
// from a tree fitted on those features (training split), like fit_expert.
ExpertModel oracle_feature_expert(const TaskDataset& ds,
                                  std::span<const int> feature_indices,
                                  int max_depth);

ExpertModel consensus_expert(int num_conditions);

// Y_H = 1 (healthy) iff every sampled c_i ~ Bernoulli(p_i) is 0.
int sample_consensus_label(std::span<const double> consensus, Rng& rng);

// Tree experts are deterministic and ignore `rng`; consensus experts draw
// from `rng`.
int expert_predict(const ExpertModel& expert, const LabeledSample& sample,
                   Rng& rng);

int feedback_dim(const ExpertModel& expert, FeedbackMode mode);

std::vector<double> make_feedback(const ExpertModel& expert, FeedbackMode mode,
                                  const LabeledSample& sample, Rng& rng);

// Fills `h` for every sample and records the mode and feedback_dim. Draws
// for stochastic experts come from one generator seeded with `seed`, in
// sample order.
void materialize_feedback(TaskDataset& ds, const ExpertModel& expert,
                          FeedbackMode mode, std::uint64_t seed);

}  // namespace lta
