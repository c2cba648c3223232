// Drives the lta executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string output;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string tmpl = (fs::temp_directory_path() / "lta_cli_XXXXXX").string();
    ASSERT_NE(mkdtemp(tmpl.data()), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path log = dir_ / "cli.log";
    const std::string cmd =
        std::string(LTA_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.output = slurp(log);
    return o;
  }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static int line_count(const fs::path& path) {
    std::ifstream in(path);
    int n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpExitsZero) {
  const Outcome o = run("--help");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.output.find("generate"), std::string::npos);
  EXPECT_NE(o.output.find("oracle-demo"), std::string::npos);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const fs::path a = dir_ / "a";
  const fs::path b = dir_ / "b";
  ASSERT_EQ(run("generate --task synth --seed 1 --n 4000 --out " + a.string()).code, 0);
  ASSERT_EQ(run("generate --task synth --seed 1 --n 4000 --out " + b.string()).code, 0);
  const fs::path file = "synth_seed1.csv";
  ASSERT_TRUE(fs::exists(a / file));
  EXPECT_EQ(slurp(a / file), slurp(b / file));
  EXPECT_EQ(line_count(a / file), 4002);
}

TEST_F(CliTest, UnknownTaskExitsTwoNamingTheField) {
  const Outcome o = run("generate --task cifar --out " + (dir_ / "x").string());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("task"), std::string::npos);
}

TEST_F(CliTest, UnknownFlagExitsTwo) {
  EXPECT_EQ(run("run --no-such-flag").code, 2);
}

TEST_F(CliTest, RunWritesFifteenCurves) {
  const fs::path out = dir_ / "run";
  const Outcome o = run(
      "run --task synth --n 400 --epochs 4 --pretrain-epochs 2 --methods ltd lta_seq "
      "lta_joint --seeds 0 1 2 3 4 --delta 0.0 --out " + out.string());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(line_count(out / "results.csv"), 1 + 15 * 11);
  EXPECT_TRUE(fs::exists(out / "manifest.ini"));
  EXPECT_NE(o.output.find("lta_joint"), std::string::npos);
}

TEST_F(CliTest, ManifestReplaysTheRun) {
  const fs::path first = dir_ / "first";
  const fs::path second = dir_ / "second";
  ASSERT_EQ(run("run --task synth --n 300 --epochs 3 --pretrain-epochs 1 --seeds 2 "
                "--methods lta_joint --out " + first.string())
                .code,
            0);
  ASSERT_EQ(run("--config " + (first / "manifest.ini").string() + " run --out " +
                second.string())
                .code,
            0);
  EXPECT_EQ(slurp(first / "results.csv"), slurp(second / "results.csv"));
}

TEST_F(CliTest, SavedBundleReevaluatesIdentically) {
  const fs::path out = dir_ / "bundles";
  ASSERT_EQ(run("run --task synth --n 300 --epochs 3 --pretrain-epochs 1 --seeds 0 "
                "--methods lta_seq --save-bundles --out " + out.string())
                .code,
            0);
  fs::path bundle;
  fs::path data;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("lta_seq_seed0", 0) == 0) bundle = e.path();
    if (name == "lta_data_seed0.csv") data = e.path();
  }
  ASSERT_FALSE(bundle.empty());
  ASSERT_FALSE(data.empty());
  const fs::path csv = dir_ / "eval.csv";
  ASSERT_EQ(run("eval --bundle " + bundle.string() + " --data " + data.string() +
                " --out " + csv.string())
                .code,
            0);
  EXPECT_EQ(line_count(csv), 1 + 11);
}

TEST_F(CliTest, OracleDemoWritesTable) {
  const Outcome o = run("oracle-demo --seeds 0 --out " + dir_.string());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("toy_table"), std::string::npos);
  EXPECT_EQ(line_count(dir_ / "oracle_demo.csv"), 5);
}

}  // namespace
