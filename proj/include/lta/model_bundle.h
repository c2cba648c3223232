#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lta/datagen.h"
#include "lta/enriched_net.h"
#include "lta/losses.h"
#include "lta/nn_core.h"

namespace lta {

enum class Method { kLtd, kLtaSeq, kLtaJoint };

const char* method_name(Method method);
Method parse_method(const std::string& name);

struct TrainPlan {
  Method method = Method::kLtaJoint;
  // Stage-one epochs (g alone for LtA-Seq, f and g independently for
  // LtA-Joint). Ignored by LtD.
  int pretrain_epochs = 50;
  int main_epochs = 100;
  SgdConfig sgd;
  DeferCost cost;
  int hidden = 32;
  Injection injection = Injection::kConcat;

  void validate() const;
  int total_epochs() const;

  // Fixed 150-epoch budget: LtD spends it all on f and s; the LtA methods
  // split it 50 / 100.
  static TrainPlan for_budget(Method method, int total_epochs,
                              int pretrain_epochs);
};

// The three heads. f and s read the machine-visible features; g reads
// those features plus the feedback vector.
struct ModelBundle {
  Method method = Method::kLtaJoint;
  int num_classes = 0;
  DenseNet f;
  EnrichedNet g;
  DenseNet s;
  TrainPlan plan;
  std::uint64_t data_seed = 0;
  std::uint64_t train_seed = 0;

  std::vector<double> f_logits(const TaskDataset& ds,
                               const LabeledSample& sample) const;
  std::vector<double> g_logits(const TaskDataset& ds,
                               const LabeledSample& sample) const;
  double s_logit(const TaskDataset& ds, const LabeledSample& sample) const;
};

}  // namespace lta
