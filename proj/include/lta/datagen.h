#pragma once

// Synthetic task generators: the exact 2-bit table, the Gaussian-centroid
// scenarios, the 4-feature Synth task and the multi-condition consensus task.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lta {

enum class Split : std::uint8_t { kTrain, kCalibration, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct LabeledSample {
  std::vector<double> x;
  int y = 0;
  // Expert feedback; empty until materialized.
  std::vector<double> h;
  // Per-condition annotator consensus (consensus task only).
  std::vector<double> consensus;
  // Probability mass of this row. Sampled tasks use 1; the exact toy table
  // stores its distribution as weights summing to 1.
  double weight = 1.0;
  Split split = Split::kTrain;
};

struct TaskDataset {
  std::string task;
  int num_classes = 0;
  int feature_dim = 0;
  int feedback_dim = 0;
  // Feedback representation currently stored in `h` ("none" until set).
  std::string feedback_mode = "none";
  // Columns of x visible to the standard predictor and selector.
  std::vector<int> machine_features;
  // Columns of x reserved to the expert (empty for the consensus task).
  std::vector<int> expert_features;
  int num_conditions = 0;
  std::vector<LabeledSample> samples;

  std::size_t size() const { return samples.size(); }
  std::size_t count(Split split) const;
  std::vector<std::size_t> indices(Split split) const;

  // Gathers x at machine_features.
  std::vector<double> machine_input(const LabeledSample& sample) const;
  // machine_input(sample) followed by sample.h.
  std::vector<double> enriched_input(const LabeledSample& sample) const;

  // Throws DataError if any sample violates the dimension invariants.
  void validate() const;
};

TaskDataset make_toy_table();

struct ScenarioSpec {
  double sep = 1.0;
  double noise_sd = 0.4;
  double machine_shift = 0.0;
  double expert_shift = 0.0;
  int n = 4000;
  std::uint64_t seed = 0;

  void validate() const;
};

TaskDataset make_scenario(const ScenarioSpec& spec);

struct SynthSpec {
  int n = 4000;
  std::uint64_t seed = 0;
  // Centroid half-distance on every feature axis.
  double sep = 1.0;
  double noise_sd = 1.2;

  void validate() const;
};

TaskDataset make_synth(std::uint64_t seed, int n);
TaskDataset make_synth(const SynthSpec& spec);

struct ConsensusSpec {
  int n_conditions = 4;
  int n_annotators = 3;
  double condition_signal = 0.6;
  int n = 4000;
  std::uint64_t seed = 0;
  // Probability that each condition is present.
  double prevalence = 0.15;
  // Report-rate ranges for present and absent conditions.
  double sensitivity_min = 0.8;
  double false_report_max = 0.1;
  // Additive shift of every annotator's report probability; 0 = unbiased.
  double annotator_bias = 0.0;

  void validate() const;
};

// Ground-truth condition probabilities r[i] are kept in the returned
// dataset's side table so Monte-Carlo checks can compare p against them.
struct ConsensusTask {
  TaskDataset data;
  // Per-sample, per-condition probability that a single annotator reports
  // the condition.
  std::vector<std::vector<double>> report_rate;
  // Per-sample latent ground-truth conditions.
  std::vector<std::vector<int>> conditions;
};

ConsensusTask make_consensus_task(const ConsensusSpec& spec);

struct SplitRatios {
  double train = 0.7;
  double calibration = 0.1;
  double test = 0.2;
};

// Assigns split tags by seeded shuffle; counts are round(n * ratio) for the
// first two splits and the remainder for test.
TaskDataset split(TaskDataset ds, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace lta
