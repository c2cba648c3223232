#pragma once

// Multi-seed sweeps: per-seed task construction, training, evaluation,
// aggregation and result files.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lta/datagen.h"
#include "lta/eval_harness.h"
#include "lta/expert_sim.h"
#include "lta/model_bundle.h"

namespace lta {

struct ExperimentConfig {
  // toy_table | scenario | synth | consensus
  std::string task = "synth";
  // Feedback handed to g by the LtA methods: ltd | unc | feature. LtD always
  // sees the expert's predicted label.
  std::string feedback = "ltd";
  std::vector<std::string> methods{"ltd", "lta_seq", "lta_joint"};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<double> deltas{0.0};
  std::vector<double> beta_grid = default_beta_grid();
  int epochs = 150;
  int pretrain_epochs = 50;
  double lr = 0.05;
  int batch_size = 128;
  int hidden = 32;
  double alpha = 1.0;
  std::string score_mode = "selector_logit";
  std::string injection = "concat";
  int expert_depth = 3;
  // Worker threads; 0 picks the hardware concurrency.
  int jobs = 0;
  std::string out;
  bool save_bundles = false;

  // n, when positive, overrides the per-task sample counts below.
  int n = 0;
  ScenarioSpec scenario;
  SynthSpec synth;
  ConsensusSpec consensus;

  // Throws ConfigError naming the offending field.
  void validate() const;
  TrainPlan plan_for(Method method, double delta, std::uint64_t seed) const;
};

// Everything a run needs that depends only on (config, seed).
struct SeedContext {
  std::uint64_t seed = 0;
  ExpertModel expert;
  // Same samples and splits; h holds the expert label (ltd) or the
  // configured LtA feedback.
  TaskDataset ltd_data;
  TaskDataset lta_data;
  double expert_alone = 0.0;
  double machine_alone = 0.0;
};

// The split-tagged dataset for a seed, before any feedback.
TaskDataset make_task(const ExperimentConfig& cfg, std::uint64_t seed);

// Without baselines the expert-alone and machine-alone fields stay 0 and no
// classifier is trained.
SeedContext build_context(const ExperimentConfig& cfg, std::uint64_t seed,
                          bool with_baselines = true);

// Test-split accuracy of the expert; stochastic experts average `resamples`
// independent draws.
double expert_accuracy(const TaskDataset& ds, const ExpertModel& expert,
                       std::uint64_t seed, int resamples);

struct RunResult {
  CoverageCurve curve;
  std::optional<ModelBundle> bundle;
};

RunResult run_one(const ExperimentConfig& cfg, const SeedContext& ctx,
                  Method method, double delta);

struct RunFailure {
  std::string method;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::string message;
};

struct SweepResult {
  // Ordered by (seed, method, delta) as listed in the config.
  std::vector<CoverageCurve> curves;
  std::vector<ModelBundle> bundles;
  std::vector<RunFailure> failures;
};

// Runs methods x seeds x deltas on a worker pool. A failing run is recorded
// and the rest continue.
SweepResult sweep(const ExperimentConfig& cfg);

struct AggregatePoint {
  std::string method;
  double delta = 0.0;
  double beta = 0.0;
  int runs = 0;
  double mean_accuracy = 0.0;
  // Sample standard deviation; 0 for a single run.
  double std_accuracy = 0.0;
  double mean_ask_rate = 0.0;
};

std::vector<AggregatePoint> aggregate(const std::vector<CoverageCurve>& curves);

// Looks up one aggregate row; throws DataError if absent.
const AggregatePoint& find_point(const std::vector<AggregatePoint>& points,
                                 const std::string& method, double delta,
                                 double beta);

void write_results_csv(std::ostream& out,
                       const std::vector<CoverageCurve>& curves);

// INI-style manifest with a [run] section whose keys are the run flags, so
// it can be passed back through --config.
void write_manifest(std::ostream& out, const ExperimentConfig& cfg,
                    const SweepResult& result);

std::string format_summary(const std::vector<AggregatePoint>& points);

}  // namespace lta
