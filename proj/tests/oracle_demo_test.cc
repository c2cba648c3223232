#include "lta/oracle_demo.h"

#include <gtest/gtest.h>

#include <sstream>

namespace lta {
namespace {

TEST(ToyOracle, ExactValues) {
  const OracleRow row = toy_table_oracle();
  ASSERT_EQ(row.ltd_star.size(), 1u);
  EXPECT_EQ(row.machine[0], 0.5);
  EXPECT_EQ(row.expert[0], 0.5);
  EXPECT_EQ(row.ltd_star[0], 0.5);
  EXPECT_EQ(row.lta_star[0], 1.0);
}

TEST(MeanStd, SampleStatistics) {
  const MeanStd ms = mean_std({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.0);
  EXPECT_DOUBLE_EQ(ms.std, 1.0);
  EXPECT_EQ(mean_std({4.0}).std, 0.0);
}

TEST(ScenarioOracle, AskingDominatesDeferring) {
  for (const NamedScenario& sc : default_scenarios()) {
    const OracleRow row = scenario_oracle(sc, {0});
    EXPECT_GE(row.lta_star[0], row.ltd_star[0]) << sc.name;
    EXPECT_GE(row.ltd_star[0], 0.0);
    EXPECT_LE(row.lta_star[0], 1.0);
  }
}

TEST(OracleCsv, OneRowPerSetting) {
  std::vector<OracleRow> rows{toy_table_oracle()};
  std::ostringstream out;
  write_oracle_csv(out, rows);
  EXPECT_EQ(out.str(),
            "setting,runs,machine_mean,machine_std,expert_mean,expert_std,"
            "ltd_star_mean,ltd_star_std,lta_star_mean,lta_star_std\n"
            "toy_table,1,0.5,0,0.5,0,0.5,0,1,0\n");
  EXPECT_NE(format_oracle_table(rows).find("toy_table"), std::string::npos);
}

}  // namespace
}  // namespace lta
