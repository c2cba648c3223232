#pragma once

// Label-aware oracle comparison of deferring (LtD*) and asking (LtA*).
//
// Both oracles score an instance by the probability the better of two
// agents assigns to its true label: LtD* picks between the machine and the
// expert, LtA* between the machine and a predictor that sees both feature
// groups. Accuracies are therefore expectations under the agents'
// predictive distributions.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lta/datagen.h"

namespace lta {

struct OracleRow {
  std::string name;
  std::vector<double> machine;
  std::vector<double> expert;
  std::vector<double> ltd_star;
  std::vector<double> lta_star;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample std; 0 for fewer than two values.
MeanStd mean_std(const std::vector<double>& values);

// Exact values on the weighted 2-bit table, from Bayes posteriors of each
// feature group.
OracleRow toy_table_oracle();

struct NamedScenario {
  std::string name;
  ScenarioSpec spec;
};

// balanced, machine_strong, expert_strong.
std::vector<NamedScenario> default_scenarios();

// Optimizer settings of the logistic fits.
struct LogisticFit {
  double learning_rate = 1.0;
  int epochs = 300;
  // Larger than the training split: full-batch gradient descent.
  int batch_size = 4000;
};

// One run per seed: generate, split 60:40, fit logistic models on x1, x2
// and (x1, x2), score the test split.
OracleRow scenario_oracle(const NamedScenario& scenario,
                          const std::vector<std::uint64_t>& seeds,
                          const LogisticFit& fit = {});

std::vector<OracleRow> run_oracle_demo(const std::vector<std::uint64_t>& seeds);

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows);
std::string format_oracle_table(const std::vector<OracleRow>& rows);

}  // namespace lta
