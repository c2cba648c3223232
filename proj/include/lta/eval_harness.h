#pragma once

// Accuracy-vs-coverage evaluation of trained bundles.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lta/datagen.h"
#include "lta/model_bundle.h"
#include "lta/selection.h"

namespace lta {

struct CoveragePoint {
  double beta = 0.0;
  double coverage = 1.0;
  double tau = 0.0;
  double ask_rate = 0.0;
  double system_accuracy = 0.0;
  double f_only_accuracy = 0.0;
  // g for LtA bundles, the expert's own prediction for LtD bundles.
  double g_accuracy = 0.0;
};

struct CoverageCurve {
  std::string method;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double expert_alone = std::numeric_limits<double>::quiet_NaN();
  double machine_alone = std::numeric_limits<double>::quiet_NaN();
  std::vector<CoveragePoint> points;

  // Throws DataError unless betas are strictly increasing and all rates lie
  // in [0,1].
  void validate() const;
};

// Records when test labels are first read relative to the end of test-time
// prediction.
struct EvalTrace {
  bool test_predictions_complete = false;
  bool test_label_read_before_predictions = false;
  std::size_t calibration_size = 0;
  std::size_t test_size = 0;
};

std::vector<double> default_beta_grid();

// For each beta: fit tau on calibration scores, apply it on test. The
// loss-gap score uses the lambda >= 0 floor; selector logits are ranked
// with no floor so that beta = 1 asks on every test instance.
CoverageCurve evaluate(const ModelBundle& bundle, ScoreMode mode,
                       const TaskDataset& ds, std::span<const double> beta_grid,
                       EvalTrace* trace = nullptr);

double score_floor(ScoreMode mode);

struct ComplementarityReport {
  std::vector<double> complementary_betas;
  double best_margin = -std::numeric_limits<double>::infinity();

  bool any() const { return !complementary_betas.empty(); }
};

// Flags every beta whose system accuracy strictly exceeds both baselines.
ComplementarityReport complementarity(const CoverageCurve& curve,
                                      double expert_alone,
                                      double machine_alone);

}  // namespace lta
