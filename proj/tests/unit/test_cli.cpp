#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "nlreg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = nlreg::cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nlreg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SynthThenComplete) {
  const Outcome s = run({"synth", "completion", "--out", path("c"), "--n-per-class", "12", "--dim",
                     "4", "--classes", "1", "--missing-prob", "0.25", "--seed", "3"});
  ASSERT_EQ(s.code, 0) << s.err;
  const json sj = json::parse(s.out);
  EXPECT_EQ(sj["command"], "synth");
  EXPECT_EQ(sj["matrix"]["cols"], 12);

  const Outcome c = run({"complete", "--data", path("c_observed.csv"), "--gt", path("c_truth.csv"),
                     "--rho-max", "10", "--max-inner", "5", "--out", path("filled.csv")});
  ASSERT_EQ(c.code, 0) << c.err;
  const json cj = json::parse(c.out);
  EXPECT_EQ(cj["config"]["tau"], "0.1");
  EXPECT_GE(cj["metrics"]["completion_rms"]["deleted"].get<double>(), 0.0);
  EXPECT_GT(cj["metrics"]["mean_imputation_rms"]["deleted"].get<double>(), 0.0);
  const Eigen::MatrixXd filled = nlreg::load_matrix(path("filled.csv"));
  EXPECT_EQ(filled.cols(), 12);
  EXPECT_TRUE(filled.allFinite());
}

TEST_F(Cli, LinearKernelAgreesWithTraceNormBaseline) {
  ASSERT_EQ(run({"synth", "completion", "--out", path("c"), "--n-per-class", "15", "--dim", "5",
                 "--classes", "1", "--missing-prob", "0.2", "--seed", "5"})
                .code,
            0);
  const Outcome a = run({"complete", "--data", path("c_observed.csv"), "--gt", path("c_truth.csv"),
                     "--kernel", "linear", "--tau", "0.5"});
  const Outcome b = run({"tnh", "--data", path("c_observed.csv"), "--gt", path("c_truth.csv"),
                     "--tau", "0.5"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json::parse(a.out)["kernel"]["family"], "linear");
  EXPECT_TRUE(json::parse(b.out)["metrics"].contains("completion_rms"));
}

TEST_F(Cli, SynthNrsfmThenTnh) {
  ASSERT_EQ(run({"synth", "nrsfm", "--out", path("seq"), "--frames", "20", "--points", "10",
                 "--seed", "2"})
                .code,
            0);
  const Outcome t = run({"tnh", "--problem", "nrsfm", "--data", path("seq.mocap"), "--gt-cameras",
                     "--tau", "0.01"});
  ASSERT_EQ(t.code, 0) << t.err;
  const json tj = json::parse(t.out);
  EXPECT_TRUE(tj["metrics"].contains("e3d"));
  EXPECT_LT(tj["metrics"]["e3d"].get<double>(), 0.3);
}

TEST_F(Cli, UsageErrors) {
  const Outcome unknown = run({"complete", "--data", "x.csv", "--bogus"});
  EXPECT_EQ(unknown.code, nlreg::cli::kExitUsage);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, nlreg::cli::kExitUsage);
  EXPECT_EQ(run({"complete"}).code, nlreg::cli::kExitUsage);
  EXPECT_EQ(run({"complete", "--data", "x", "--kernel", "poly"}).code, nlreg::cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, ErrorCategoriesMapToExitCodes) {
  const Outcome missing = run({"complete", "--data", path("nope.csv")});
  EXPECT_EQ(missing.code, 9);  // Io
  EXPECT_EQ(json::parse(missing.err)["error"]["category"], "io_error");

  nlreg::write_file(path("bad.csv"), "# 2 2\n1,2\n3\n");
  const Outcome parse = run({"complete", "--data", path("bad.csv")});
  EXPECT_EQ(parse.code, 6);  // ParseError
  EXPECT_NE(parse.err.find("line 3"), std::string::npos);

  nlreg::write_file(path("ok.csv"), "# 2 2\n1,nan\n3,4\n");
  EXPECT_EQ(run({"complete", "--data", path("ok.csv"), "--width", "wide"}).code, 3);
}
