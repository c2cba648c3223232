#include "lta/expert_sim.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "lta/errors.h"

namespace lta {
namespace {

struct TreeBuilder {
  std::span<const std::vector<double>> xs;
  std::span<const int> ys;
  std::span<const double> weights;
  int num_classes;
  std::span<const int> features;
  int max_depth;
  std::vector<TreeNode> nodes;

  std::vector<double> class_mass(std::span<const std::size_t> rows) const {
    std::vector<double> mass(num_classes, 0.0);
    for (std::size_t r : rows) mass[ys[r]] += weights[r];
    return mass;
  }

  static double gini(std::span<const double> mass, double total) {
    if (total <= 0) return 0.0;
    double sq = 0.0;
    for (double m : mass) sq += (m / total) * (m / total);
    return 1.0 - sq;
  }

  int build(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const std::vector<double> mass = class_mass(rows);
    nodes[id].label = static_cast<int>(
        std::max_element(mass.begin(), mass.end()) - mass.begin());
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    const double parent_impurity = gini(mass, total);
    if (depth >= max_depth || rows.size() < 2 || parent_impurity <= 0.0) {
      return id;
    }

    double best_score = parent_impurity - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (int f : features) {
      std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        return xs[a][f] < xs[b][f];
      });
      std::vector<double> left(num_classes, 0.0);
      double left_total = 0.0;
      for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const std::size_t r = rows[k];
        left[ys[r]] += weights[r];
        left_total += weights[r];
        const double v = xs[r][f];
        const double next = xs[rows[k + 1]][f];
        if (next <= v) continue;
        std::vector<double> right(num_classes);
        for (int c = 0; c < num_classes; ++c) right[c] = mass[c] - left[c];
        const double right_total = total - left_total;
        const double score = (left_total * gini(left, left_total) +
                              right_total * gini(right, right_total)) /
                             total;
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> lrows;
    std::vector<std::size_t> rrows;
    for (std::size_t r : rows) {
      (xs[r][best_feature] <= best_threshold ? lrows : rrows).push_back(r);
    }
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const int l = build(std::move(lrows), depth + 1);
    const int r = build(std::move(rrows), depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

int subtree_depth(const std::vector<TreeNode>& nodes, int id) {
  const TreeNode& n = nodes[id];
  if (n.feature < 0) return 0;
  return 1 + std::max(subtree_depth(nodes, n.left), subtree_depth(nodes, n.right));
}

DecisionTree fit_on_training_split(const TaskDataset& ds,
                                   std::span<const int> feature_indices,
                                   int max_depth) {
  for (int f : feature_indices) {
    if (f < 0 || f >= ds.feature_dim) {
      throw ConfigError("expert feature index " + std::to_string(f) +
                        " out of range");
    }
  }
  if (max_depth < 0) throw ConfigError("expert max_depth must be >= 0");
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  std::vector<double> ws;
  for (const LabeledSample& s : ds.samples) {
    if (s.split != Split::kTrain) continue;
    xs.push_back(s.x);
    ys.push_back(s.y);
    ws.push_back(s.weight);
  }
  if (xs.empty()) throw ConfigError("expert training split is empty");
  return fit_tree(xs, ys, ws, ds.num_classes, feature_indices, max_depth);
}

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim) {
    throw DataError("tree expects input of size " + std::to_string(input_dim) +
                    ", got " + std::to_string(x.size()));
  }
  int id = 0;
  while (nodes[id].feature >= 0) {
    id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left
                                                     : nodes[id].right;
  }
  return nodes[id].label;
}

int DecisionTree::depth() const {
  return nodes.empty() ? 0 : subtree_depth(nodes, 0);
}

DecisionTree fit_tree(std::span<const std::vector<double>> xs,
                      std::span<const int> ys, std::span<const double> weights,
                      int num_classes, std::span<const int> features,
                      int max_depth) {
  if (xs.empty()) throw ConfigError("cannot fit a tree on zero rows");
  TreeBuilder builder{xs, ys, weights, num_classes, features, max_depth, {}};
  std::vector<std::size_t> rows(xs.size());
  std::iota(rows.begin(), rows.end(), 0);
  builder.build(std::move(rows), 0);
  DecisionTree tree;
  tree.input_dim = static_cast<int>(xs.front().size());
  tree.num_classes = num_classes;
  tree.features.assign(features.begin(), features.end());
  tree.nodes = std::move(builder.nodes);
  return tree;
}

const char* feedback_name(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::kLtd:
      return "ltd";
    case FeedbackMode::kUnc:
      return "unc";
    case FeedbackMode::kFeature:
      return "feature";
  }
  return "?";
}

FeedbackMode parse_feedback(const std::string& name) {
  if (name == "ltd" || name == "ltd_feedback") return FeedbackMode::kLtd;
  if (name == "unc" || name == "unc_feedback") return FeedbackMode::kUnc;
  if (name == "feature" || name == "feature_feedback") {
    return FeedbackMode::kFeature;
  }
  throw ConfigError("unknown feedback mode '" + name + "'");
}

const char* expert_kind_name(ExpertModel::Kind kind) {
  switch (kind) {
    case ExpertModel::Kind::kFeatureSubsetTree:
      return "feature_subset_tree";
    case ExpertModel::Kind::kBernoulliConsensus:
      return "bernoulli_consensus";
    case ExpertModel::Kind::kOracleFeature:
      return "oracle_feature";
  }
  return "?";
}

ExpertModel::Kind parse_expert_kind(const std::string& name) {
  if (name == "feature_subset_tree") return ExpertModel::Kind::kFeatureSubsetTree;
  if (name == "bernoulli_consensus") return ExpertModel::Kind::kBernoulliConsensus;
  if (name == "oracle_feature") return ExpertModel::Kind::kOracleFeature;
  throw DataError("unknown expert kind '" + name + "'");
}

ExpertModel fit_expert(const TaskDataset& ds,
                       std::span<const int> feature_indices, int max_depth) {
  ExpertModel e;
  e.kind = ExpertModel::Kind::kFeatureSubsetTree;
  e.num_classes = ds.num_classes;
  e.tree = fit_on_training_split(ds, feature_indices, max_depth);
  e.feature_indices.assign(feature_indices.begin(), feature_indices.end());
  return e;
}

ExpertModel oracle_feature_expert(const TaskDataset& ds,
                                  std::span<const int> feature_indices,
                                  int max_depth) {
  ExpertModel e = fit_expert(ds, feature_indices, max_depth);
  e.kind = ExpertModel::Kind::kOracleFeature;
  return e;
}

ExpertModel consensus_expert(int num_conditions) {
  if (num_conditions < 1) throw ConfigError("consensus expert needs conditions");
  ExpertModel e;
  e.kind = ExpertModel::Kind::kBernoulliConsensus;
  e.num_classes = 2;
  e.num_conditions = num_conditions;
  return e;
}

int sample_consensus_label(std::span<const double> consensus, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool any = false;
  // Every condition is drawn, even after one fires, so the number of draws
  // per sample is fixed.
  for (double p : consensus) {
    if (unit(rng) < p) any = true;
  }
  return any ? 0 : 1;
}

int expert_predict(const ExpertModel& expert, const LabeledSample& sample,
                   Rng& rng) {
  switch (expert.kind) {
    case ExpertModel::Kind::kFeatureSubsetTree:
    case ExpertModel::Kind::kOracleFeature:
      return expert.tree.predict(sample.x);
    case ExpertModel::Kind::kBernoulliConsensus:
      if (static_cast<int>(sample.consensus.size()) != expert.num_conditions) {
        throw DataError("sample carries " +
                        std::to_string(sample.consensus.size()) +
                        " consensus values, expert expects " +
                        std::to_string(expert.num_conditions));
      }
      return sample_consensus_label(sample.consensus, rng);
  }
  return 0;
}

int feedback_dim(const ExpertModel& expert, FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::kLtd:
      return expert.num_classes;
    case FeedbackMode::kUnc:
      if (expert.kind != ExpertModel::Kind::kBernoulliConsensus) {
        throw ConfigError("unc feedback requires a consensus expert");
      }
      return expert.num_conditions;
    case FeedbackMode::kFeature:
      if (expert.kind == ExpertModel::Kind::kBernoulliConsensus) {
        throw ConfigError("feature feedback requires a feature-based expert");
      }
      return static_cast<int>(expert.feature_indices.size());
  }
  return 0;
}

std::vector<double> make_feedback(const ExpertModel& expert, FeedbackMode mode,
                                  const LabeledSample& sample, Rng& rng) {
  const int dim = feedback_dim(expert, mode);
  std::vector<double> h(dim, 0.0);
  switch (mode) {
    case FeedbackMode::kLtd:
      h[expert_predict(expert, sample, rng)] = 1.0;
      break;
    case FeedbackMode::kUnc:
      h = sample.consensus;
      break;
    case FeedbackMode::kFeature:
      for (int k = 0; k < dim; ++k) {
        h[k] = sample.x.at(expert.feature_indices[k]);
      }
      break;
  }
  return h;
}

void materialize_feedback(TaskDataset& ds, const ExpertModel& expert,
                          FeedbackMode mode, std::uint64_t seed) {
  if (expert.num_classes != ds.num_classes) {
    throw ConfigError("expert and dataset disagree on class count");
  }
  const int dim = feedback_dim(expert, mode);
  Rng rng(seed);
  for (LabeledSample& s : ds.samples) s.h = make_feedback(expert, mode, s, rng);
  ds.feedback_dim = dim;
  ds.feedback_mode = feedback_name(mode);
}

}  // namespace lta
