#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace obswin::cli {
namespace {

const std::string kSystems = std::string(OBSWIN_DATA_DIR) + "/systems/";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("obswin_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(Cli, RankExampleOne) {
  const Result r = run_cli({"rank", kSystems + "example1.sys", "--N", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["verdict"], "deficient-at-witnesses");
  EXPECT_EQ(j["witness"][0], 0.0);
  EXPECT_EQ(j["N"], 3);
}

TEST(Cli, WindowCsvCurve) {
  const Result r = run_cli({"window", kSystems + "example2-kink.sys", "--Tmax", "5", "--eps",
                            "1e-3", "--rgrid", "0.5,0.1,0.01", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "r,T_hat,n_pairs,n_undistinguished,n_truncated,lower_bound");
  const double expected[] = {std::log(1.001 / 0.5), std::log(1.001 / 0.1), std::log(1.001 / 0.01)};
  for (double e : expected) {
    ASSERT_TRUE(std::getline(lines, line));
    const auto a = line.find(','), b = line.find(',', a + 1);
    EXPECT_NEAR(std::stod(line.substr(a + 1, b - a - 1)), e, 1e-6) << line;
  }
}

TEST(Cli, KfunLinearContraction) {
  const Result r = run_cli({"kfun", kSystems + "linear-contraction.sys", "--T", "1", "--rgrid",
                            "0.2,0.5,1.0", "--starts", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["verdict"], "k-function-constructed");
  EXPECT_EQ(j["minorant_verified"], true);
  EXPECT_EQ(j["hypotheses"]["satisfied"], true);
}

TEST(Cli, KfunRefusesWithoutHypotheses) {
  const std::vector<std::string> base{"kfun", kSystems + "example2-kink.sys", "--T", "2",
                                      "--rgrid", "0.1,0.3", "--starts", "8"};
  const Result refused = run_cli(base);
  EXPECT_EQ(refused.code, 2);
  EXPECT_NE(refused.err.find("--force"), std::string::npos);

  auto forced_args = base;
  forced_args.push_back("--force");
  const Result forced = run_cli(forced_args);
  ASSERT_EQ(forced.code, 0) << forced.err;
  const Json j = Json::parse(forced.out);
  EXPECT_EQ(j["verdict"], "not-k-observable-on-evidence");
  ASSERT_GE(j["witnesses"].size(), 1u);
  EXPECT_EQ(j["witnesses"][0]["integral_eta"], 0.0);
}

TEST(Cli, KfunReusesCachedHypotheses) {
  const auto dir = scratch("cache");
  const std::vector<std::string> args{"kfun", kSystems + "linear-contraction.sys", "--T", "1",
                                      "--rgrid", "0.2,0.5", "--starts", "4", "--out",
                                      dir.string()};
  ASSERT_EQ(run_cli(args).code, 0);
  ASSERT_EQ(run_cli(args).code, 0);
  std::ifstream in(dir / "kfun.json");
  const Json j = Json::parse(in);
  EXPECT_EQ(j["hypotheses"]["rank"]["source"], "cached");
  EXPECT_EQ(j["hypotheses"]["window"]["source"], "cached");
  std::filesystem::remove_all(dir);
}

TEST(Cli, BundleIndexListsChecksums) {
  const auto dir = scratch("bundle");
  const Result r = run_cli({"rank", kSystems + "example1.sys", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json index = Json::parse(r.out);
  ASSERT_EQ(index["files"].size(), 2u);
  for (const Json& f : index["files"]) {
    std::ifstream in(dir / f["name"].get<std::string>(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str().size(), f["bytes"].get<std::size_t>());
    EXPECT_EQ(sha256_hex(buf.str()), f["sha256"]);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "index.json"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, ReportBundleNeedsArtifacts) {
  EXPECT_THROW(report_bundle(scratch("empty"), {}), PreconditionError);
}

TEST(Cli, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"rank"}).code, 1);
  EXPECT_EQ(run_cli({"rank", kSystems + "missing.sys"}).code, 1);
  EXPECT_EQ(run_cli({"alpha0", kSystems + "linear-contraction.sys", "--rgrid", "0.5,0.2"}).code, 1);
  EXPECT_EQ(run_cli({"reproduce", "nosuch"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);

  // A file where the rank map is undefined everywhere.
  const auto dir = scratch("bad");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "log.sys") << "system s\ndim 1\noutputs 1\nf1 = 1\nh1 = log(x1)\n"
                                    "omega [-1, 0]\n";
  EXPECT_EQ(run_cli({"rank", (dir / "log.sys").string()}).code, 2);
  std::ofstream(dir / "broken.sys") << "system s\ndim 1\n";
  const Result broken = run_cli({"validate", (dir / "broken.sys").string()});
  EXPECT_EQ(broken.code, 1);
  EXPECT_FALSE(broken.err.empty());

  // A regular file where the output directory should go.
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(run_cli({"rank", kSystems + "example1.sys", "--out", (dir / "blocker").string()}).code,
            2);
  std::filesystem::remove_all(dir);
}

TEST(Cli, DistinguishAndValidate) {
  Result r = run_cli({"distinguish", kSystems + "example2-kink.sys", "--x1", "0", "--x2", "0.1",
                      "--Tmax", "2", "--eps", "1e-3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["result"]["verdict"], "not-distinguished");
  r = run_cli({"distinguish", kSystems + "example2-kink.sys", "--x1", "0", "--x2", "0.1,0.2"});
  EXPECT_EQ(r.code, 1);

  r = run_cli({"validate", kSystems + "example1.sys"});
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j["warnings"].size(), 1u);
  EXPECT_EQ(j["warnings"][0]["kind"], "finite-escape");
}

TEST(Cli, ReproduceEveryExample) {
  for (const char* name : {"example1", "example2-kink", "example2-smooth", "linear-contraction",
                           "double-integrator"}) {
    const Result r = run_cli({"reproduce", name, "--starts", "6", "--budget", "80"});
    ASSERT_EQ(r.code, 0) << name << ": " << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["example"], name);
  }
}

}  // namespace
}  // namespace obswin::cli
