#pragma once

// Training pipelines for the LtD baseline, LtA-Seq and LtA-Joint.

#include <cstdint>
#include <vector>

#include "lta/datagen.h"
#include "lta/model_bundle.h"

namespace lta {

struct TrainReport {
  // Mean training loss per epoch of the final phase (CE-mixture for LtD and
  // LtA-Seq stage two, the joint surrogate for LtA-Joint).
  std::vector<double> main_loss;
  // Mean cross-entropy per pretraining epoch (g for LtA-Seq, f then g for
  // LtA-Joint, concatenated).
  std::vector<double> pretrain_loss;
  int epochs_run = 0;
};

// f and s on the cross-entropy deferral mixture against the expert
// predictions stored as one-hot ltd feedback. g is a passthrough of h.
ModelBundle train_ltd(const TaskDataset& ds, const TrainPlan& plan,
                      TrainReport* report = nullptr);

// Stage one: g alone with cross-entropy. Stage two: g frozen, its argmax
// one-hot plays the expert in the deferral mixture for f and s.
ModelBundle train_lta_seq(const TaskDataset& ds, const TrainPlan& plan,
                          TrainReport* report = nullptr);

// Phase one: f and g pretrained independently with cross-entropy. Phase
// two: f, g and s jointly on the MAE/MAE/SIG surrogate.
ModelBundle train_lta_joint(const TaskDataset& ds, const TrainPlan& plan,
                            TrainReport* report = nullptr);

ModelBundle train(const TaskDataset& ds, const TrainPlan& plan,
                  TrainReport* report = nullptr);

// Plain cross-entropy classifier on the machine-visible features of the
// training split; used for machine-alone baselines and logistic models.
DenseNet train_machine_classifier(const TaskDataset& ds, int hidden,
                                  const SgdConfig& sgd);

// Same, on an explicit feature subset (hidden = 0 gives multinomial
// logistic regression).
DenseNet train_feature_classifier(const TaskDataset& ds,
                                  const std::vector<int>& features, int hidden,
                                  const SgdConfig& sgd);

std::vector<double> gather(const std::vector<double>& x,
                           const std::vector<int>& features);

}  // namespace lta
