#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "affsym/cli.hpp"

namespace fs = std::filesystem;
using affsym::cli::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "affsym");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = affsym::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(AFFSYM_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("affsym_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& stem) const { return (dir_ / stem).string(); }

  std::string write_config(const std::string& name, const Json& j) const {
    const std::string p = path(name);
    std::ofstream(p) << j.dump();
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ClassifyQuadricThreeSphere) {
  const Result r = run_cli({"classify", "--surface", "sphere3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("NotApplicable(mu1=0): 100%"), std::string::npos) << r.out;
}

TEST_F(CliTest, ClassifyFamilyConfig) {
  const Result r = run_cli({"classify", "--config", config("case1_titeica.json"), "--grid", "2,2,2", "--output",
                            path("classify")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Z3: 100%"), std::string::npos) << r.out;
  const Json j = Json::parse(slurp(path("classify.json")));
  EXPECT_EQ(j.at("schema_version"), 1);
}

TEST_F(CliTest, VerifyPassesOnFamily) {
  const Result r = run_cli({"verify", "--config", config("case1_titeica.json"), "--samples", "6", "--output",
                            path("verify")});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("verify.json")));
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("roundtrip").at("Z3"), 6);
}

TEST_F(CliTest, VerifyWarnsBetweenToleranceAndHardLimit) {
  Json cfg = {{"schema_version", 1}, {"surface", "titeica"}, {"samples", 4}, {"tolerances", {{"residual", 1e-16}}}};
  const Result r = run_cli({"verify", "--config", write_config("tight.json", cfg), "--output", path("tight")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning: max residual"), std::string::npos) << r.err;
  const Json j = Json::parse(slurp(path("tight.json")));
  EXPECT_TRUE(j.at("warning").get<bool>());
}

TEST_F(CliTest, VerifyFailsOnIndefiniteFamily) {
  Json cfg = {{"schema_version", 1},
              {"family",
               {{"case", "Case1"},
                {"sphere", {{"name", "ellipsoid"}}},
                {"curve", {{"kind", "polynomial"}, {"gamma1", {0, 1}}, {"gamma2", {0, 0, -1}}, {"t_range", {0.1, 1.0}}}}}},
              {"samples", 3}};
  const Result r = run_cli({"verify", "--config", write_config("bad.json", cfg)});
  EXPECT_EQ(r.code, 3) << r.out << r.err;
  EXPECT_NE(r.err.find("IndefiniteMetric"), std::string::npos);
}

TEST_F(CliTest, ConstructWritesMeshAndPoints) {
  const Result r = run_cli({"construct", "--config", config("case2_ma_wedge.json"), "--grid", "3,4,4", "--output",
                            path("mesh")});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(slurp(path("mesh.json")));
  EXPECT_EQ(j.at("command"), "construct");
  const std::string obj = slurp(path("mesh.obj"));
  EXPECT_EQ(obj.rfind("# ", 0), 0u);
  EXPECT_NE(obj.find("\nv "), std::string::npos);
  EXPECT_NE(obj.find("\nf "), std::string::npos);
}

TEST_F(CliTest, ConstructInadmissibleCurveExitsOne) {
  Json cfg = {{"schema_version", 1},
              {"family",
               {{"case", "Case1"},
                {"sphere", {{"name", "ellipsoid"}}},
                {"curve", {{"kind", "polynomial"}, {"gamma1", {0, 1}}, {"gamma2", {0, 1}}, {"t_range", {0.5, 1.5}}}}}}};
  const Result r = run_cli({"construct", "--config", write_config("lin.json", cfg), "--output", path("lin")});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.err.find("inadmissible curve"), std::string::npos) << r.err;
}

TEST_F(CliTest, FlowWritesCsvAndDrift) {
  const Result r = run_cli({"flow", "--config", config("flow_basic.json"), "--output", path("flow")});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("flow.csv"));
  EXPECT_EQ(csv.rfind("t,a,eta,mu1,mu2,beta,f,e2f_nu,curvN2\n", 0), 0u);
  EXPECT_NE(r.out.find("drift_nu: "), std::string::npos);
}

TEST_F(CliTest, FlowBlowUpIsNumericalFailure) {
  Json cfg = {{"schema_version", 1},
              {"flow", {{"init", {{"a", 1.0}, {"mu1", 1.0}}}, {"t_end", 2.0}, {"step", 0.001}, {"lambda", 1.0}}}};
  const Result r = run_cli({"flow", "--config", write_config("blow.json", cfg), "--output", path("blow")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("BlowUp"), std::string::npos);
}

TEST_F(CliTest, InvariantsCsv) {
  const Result r = run_cli({"invariants", "--surface", "titeica", "--grid", "2,2", "--format", "csv", "--output",
                            path("inv")});
  EXPECT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("inv.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({"classify"}).code, 2);
  EXPECT_EQ(run_cli({"classify", "--surface", "torus"}).code, 2);
  EXPECT_EQ(run_cli({"classify", "--config", path("missing.json")}).code, 2);
  EXPECT_EQ(run_cli({"bogus"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"classify", "--config", write_config("v2.json", {{"schema_version", 2}})}).code, 2);
  EXPECT_EQ(run_cli({"classify", "--config", write_config("key.json", {{"schema_version", 1}, {"colour", "red"}})}).code,
            2);
  EXPECT_EQ(run_cli({"classify", "--surface", "sphere3", "--format", "xml"}).code, 2);
}

TEST_F(CliTest, OutputIsDeterministic) {
  const auto args = [&](const std::string& stem) {
    return std::vector<std::string>{"invariants", "--config", config("case1_titeica.json"), "--grid", "2,2,2",
                                    "--output", path(stem)};
  };
  ASSERT_EQ(run_cli(args("a")).code, 0);
  ASSERT_EQ(run_cli(args("b")).code, 0);
  const std::string a = slurp(path("a.json"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.json")));
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string bin = AFFSYM_CLI_PATH;
  const std::string quiet = " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
  int status = std::system((bin + " classify --surface sphere3" + quiet).c_str());
  ASSERT_NE(status, -1);
  EXPECT_EQ(WEXITSTATUS(status), 0);
  status = std::system((bin + " classify --surface nowhere" + quiet).c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
