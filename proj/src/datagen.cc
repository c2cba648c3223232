#include "lta/datagen.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lta/errors.h"
#include "lta/random.h"

namespace lta {
namespace {

// Stream tags for derive_seed; kept distinct per generator stage.
constexpr std::uint64_t kStreamSamples = 1;
constexpr std::uint64_t kStreamProjection = 2;
constexpr std::uint64_t kStreamAnnotators = 3;
constexpr std::uint64_t kStreamSplit = 4;

double sign_of(int bit) { return bit ? 1.0 : -1.0; }

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kCalibration:
      return "cal";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "cal" || name == "calibration") return Split::kCalibration;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split tag '" + name + "'");
}

std::size_t TaskDataset::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(),
                    [split](const LabeledSample& s) { return s.split == split; }));
}

std::vector<std::size_t> TaskDataset::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<double> TaskDataset::machine_input(
    const LabeledSample& sample) const {
  std::vector<double> out;
  out.reserve(machine_features.size());
  for (int j : machine_features) out.push_back(sample.x[j]);
  return out;
}

std::vector<double> TaskDataset::enriched_input(
    const LabeledSample& sample) const {
  std::vector<double> out = machine_input(sample);
  out.insert(out.end(), sample.h.begin(), sample.h.end());
  return out;
}

void TaskDataset::validate() const {
  if (num_classes < 1) throw DataError("dataset has no classes");
  for (int j : machine_features) {
    if (j < 0 || j >= feature_dim) {
      throw DataError("machine feature index out of range");
    }
  }
  for (int j : expert_features) {
    if (j < 0 || j >= feature_dim) {
      throw DataError("expert feature index out of range");
    }
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LabeledSample& s = samples[i];
    if (static_cast<int>(s.x.size()) != feature_dim) {
      throw DataError("sample " + std::to_string(i) + " has " +
                      std::to_string(s.x.size()) + " features, expected " +
                      std::to_string(feature_dim));
    }
    if (s.y < 0 || s.y >= num_classes) {
      throw DataError("sample " + std::to_string(i) + " label out of range");
    }
    if (!s.h.empty() && static_cast<int>(s.h.size()) != feedback_dim) {
      throw DataError("sample " + std::to_string(i) +
                      " feedback dimension mismatch");
    }
  }
}

TaskDataset make_toy_table() {
  TaskDataset ds;
  ds.task = "toy_table";
  ds.num_classes = 4;
  ds.feature_dim = 2;
  ds.feedback_dim = 1;
  ds.feedback_mode = "feature";
  ds.machine_features = {0};
  ds.expert_features = {1};
  for (int x1 = 0; x1 < 2; ++x1) {
    for (int x2 = 0; x2 < 2; ++x2) {
      LabeledSample s;
      s.x = {static_cast<double>(x1), static_cast<double>(x2)};
      s.y = 2 * x1 + x2;
      s.h = {static_cast<double>(x2)};
      s.weight = 0.25;
      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

void ScenarioSpec::validate() const {
  if (!(sep > 0)) throw ConfigError("scenario.sep must be > 0");
  if (!(noise_sd > 0)) throw ConfigError("scenario.noise_sd must be > 0");
  if (n < 0) throw ConfigError("scenario.n must be >= 0");
  if (machine_shift < 0 || expert_shift < 0) {
    throw ConfigError("scenario shifts must be >= 0");
  }
}

TaskDataset make_scenario(const ScenarioSpec& spec) {
  spec.validate();
  TaskDataset ds;
  ds.task = "scenario";
  ds.num_classes = 4;
  ds.feature_dim = 2;
  ds.machine_features = {0};
  ds.expert_features = {1};
  Rng rng = make_rng(spec.seed, kStreamSamples);
  std::normal_distribution<double> noise(0.0, spec.noise_sd);
  ds.samples.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    LabeledSample s;
    s.y = i % 4;
    const int b1 = s.y / 2;
    const int b2 = s.y % 2;
    const double x1 = sign_of(b1) * (spec.sep + spec.machine_shift);
    const double x2 = sign_of(b2) * (spec.sep + spec.expert_shift);
    s.x = {x1 + noise(rng), x2 + noise(rng)};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void SynthSpec::validate() const {
  if (n < 8) throw ConfigError("synth.n must be >= 8");
  if (!(sep > 0)) throw ConfigError("synth.sep must be > 0");
  if (!(noise_sd > 0)) throw ConfigError("synth.noise_sd must be > 0");
}

TaskDataset make_synth(std::uint64_t seed, int n) {
  SynthSpec spec;
  spec.seed = seed;
  spec.n = n;
  return make_synth(spec);
}

// Class y = 2*b1 + b2. Features 0,1 are independent noisy views of b1 and
// features 2,3 of b2, so each pair alone caps accuracy at one half.
TaskDataset make_synth(const SynthSpec& spec) {
  spec.validate();
  TaskDataset ds;
  ds.task = "synth";
  ds.num_classes = 4;
  ds.feature_dim = 4;
  ds.machine_features = {0, 1};
  ds.expert_features = {2, 3};
  Rng rng = make_rng(spec.seed, kStreamSamples);
  std::uniform_int_distribution<int> label(0, 3);
  std::normal_distribution<double> noise(0.0, spec.noise_sd);
  ds.samples.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    LabeledSample s;
    s.y = label(rng);
    const double m = sign_of(s.y / 2) * spec.sep;
    const double e = sign_of(s.y % 2) * spec.sep;
    s.x = {m + noise(rng), m + noise(rng), e + noise(rng), e + noise(rng)};
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void ConsensusSpec::validate() const {
  if (n_conditions < 1) throw ConfigError("consensus.n_conditions must be >= 1");
  if (n_annotators < 1) throw ConfigError("consensus.n_annotators must be >= 1");
  if (n < 0) throw ConfigError("consensus.n must be >= 0");
  if (!(prevalence >= 0 && prevalence <= 1)) {
    throw ConfigError("consensus.prevalence must lie in [0,1]");
  }
  if (!(sensitivity_min >= 0 && sensitivity_min <= 1)) {
    throw ConfigError("consensus.sensitivity_min must lie in [0,1]");
  }
  if (!(false_report_max >= 0 && false_report_max <= 1)) {
    throw ConfigError("consensus.false_report_max must lie in [0,1]");
  }
  if (!std::isfinite(condition_signal)) {
    throw ConfigError("consensus.condition_signal must be finite");
  }
}

ConsensusTask make_consensus_task(const ConsensusSpec& spec) {
  spec.validate();
  const int nc = spec.n_conditions;
  const int dim = 2 * nc;

  // Fixed projection: each condition drives two features, with weak
  // cross-talk from the others.
  Rng proj_rng = make_rng(spec.seed, kStreamProjection);
  std::normal_distribution<double> mix(0.0, 0.2);
  std::vector<double> projection(static_cast<std::size_t>(dim) * nc);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < nc; ++i) {
      projection[j * nc + i] = (j % nc == i ? 1.0 : 0.0) + mix(proj_rng);
    }
  }

  ConsensusTask task;
  TaskDataset& ds = task.data;
  ds.task = "consensus";
  ds.num_classes = 2;
  ds.feature_dim = dim;
  ds.num_conditions = nc;
  ds.machine_features.resize(dim);
  std::iota(ds.machine_features.begin(), ds.machine_features.end(), 0);

  Rng rng = make_rng(spec.seed, kStreamSamples);
  Rng annot_rng = make_rng(spec.seed, kStreamAnnotators);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  ds.samples.reserve(spec.n);
  task.report_rate.reserve(spec.n);
  task.conditions.reserve(spec.n);
  for (int s_idx = 0; s_idx < spec.n; ++s_idx) {
    std::vector<double> rate(nc);
    std::vector<int> cond(nc);
    for (int i = 0; i < nc; ++i) {
      cond[i] = unit(rng) < spec.prevalence ? 1 : 0;
      // Per-image difficulty: the chance that one annotator reports the
      // condition is uniform on [sensitivity_min, 1] when it is present and
      // on [0, false_report_max] when it is absent.
      rate[i] = cond[i] ? spec.sensitivity_min + (1.0 - spec.sensitivity_min) * unit(rng)
                        : spec.false_report_max * unit(rng);
    }
    LabeledSample s;
    s.y = std::all_of(cond.begin(), cond.end(), [](int c) { return c == 0; })
              ? 1
              : 0;
    s.x.resize(dim);
    for (int j = 0; j < dim; ++j) {
      double v = 0.0;
      for (int i = 0; i < nc; ++i) {
        v += projection[j * nc + i] * sign_of(cond[i]);
      }
      s.x[j] = spec.condition_signal * v + noise(rng);
    }
    s.consensus.resize(nc);
    for (int i = 0; i < nc; ++i) {
      const double q = std::clamp(rate[i] + spec.annotator_bias, 0.0, 1.0);
      int reports = 0;
      for (int a = 0; a < spec.n_annotators; ++a) {
        reports += unit(annot_rng) < q ? 1 : 0;
      }
      s.consensus[i] = static_cast<double>(reports) / spec.n_annotators;
    }
    ds.samples.push_back(std::move(s));
    task.report_rate.push_back(std::move(rate));
    task.conditions.push_back(std::move(cond));
  }
  return task;
}

TaskDataset split(TaskDataset ds, const SplitRatios& ratios,
                  std::uint64_t seed) {
  if (ratios.train < 0 || ratios.calibration < 0 || ratios.test < 0) {
    throw ConfigError("split ratios must be non-negative");
  }
  const double total = ratios.train + ratios.calibration + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1 (got " +
                      std::to_string(total) + ")");
  }
  const std::size_t n = ds.samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, kStreamSplit);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train =
      static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  auto n_cal = static_cast<std::size_t>(
      std::llround(ratios.calibration * static_cast<double>(n)));
  if (n_train + n_cal > n) n_cal = n - n_train;
  for (std::size_t k = 0; k < n; ++k) {
    Split tag = Split::kTest;
    if (k < n_train) {
      tag = Split::kTrain;
    } else if (k < n_train + n_cal) {
      tag = Split::kCalibration;
    }
    ds.samples[order[k]].split = tag;
  }
  return ds;
}

}  // namespace lta
