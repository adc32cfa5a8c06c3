#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "polyex/cli.hpp"

namespace polyex::cli {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "polyex");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, WhyToyA) {
  const auto r = invoke({"why", "--model", "toy_a", "--input", "1,-1"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("class 0"), std::string::npos);
  EXPECT_NE(r.out.find("2 constraints"), std::string::npos) << r.out;
}

TEST(Cli, WhyNotToyA) {
  const auto r = invoke({"whynot", "--model", "toy_a", "--input", "1,-1", "--class", "1"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("distance 1"), std::string::npos) << r.out;
}

TEST(Cli, WhyNotUnreachableExits3) {
  const auto r = invoke({"whynot", "--model", "toy_a", "--input", "1,-1", "--class", "1", "--budget", "1"});
  EXPECT_EQ(r.code, kExitUnreachable) << r.out;
  EXPECT_NE(r.out.find("search budget exhausted"), std::string::npos) << r.out;
}

TEST(Cli, DecomposeFixture) {
  const auto r = invoke({"decompose", "--model", "fixture_2_8_2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto pos = r.out.find("feasible regions: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_LT(std::stoul(r.out.substr(pos + 18)), 256u);
  EXPECT_NE(r.out.find(" of 256 signatures"), std::string::npos);
}

TEST(Cli, PredictBoundaryNote) {
  const auto r = invoke({"predict", "--model", "toy_a", "--input", "0,0"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("boundary point"), std::string::npos);
}

TEST(Cli, JsonFormat) {
  const auto r = invoke({"whynot", "--model", "toy_a", "--input", "1,-1", "--class", "1", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["distance"], 1);
  const auto p = nlohmann::json::parse(invoke({"predict", "--model", "toy_a", "--input", "1,-1", "--format", "json"}).out);
  EXPECT_EQ(p["signature"], nlohmann::json::parse("[1, 0]"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"why", "--model", "toy_a"}).code, kExitUsage);
  EXPECT_EQ(invoke({"why", "--model", "toy_a", "--input", "1,x"}).code, kExitUsage);
  EXPECT_EQ(invoke({"why", "--model", "toy_a", "--input", "1,2,3"}).code, kExitUsage);
  EXPECT_EQ(invoke({"why", "--model", "toy_a", "--input", "1,-1", "--style", "fancy"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST(Cli, LoadFailureExits1) {
  const auto r = invoke({"why", "--model", "/nonexistent/model.json", "--input", "1,-1"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, FactualClassExits1) {
  EXPECT_EQ(invoke({"whynot", "--model", "toy_a", "--input", "1,-1", "--class", "0"}).code, kExitFailure);
}

TEST(Cli, GenfixtureRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "polyex_cli_fixture.json").string();
  ASSERT_EQ(invoke({"genfixture", "--widths", "2,8,2", "--seed", "0", "--out", path}).code, kExitOk);
  const auto a = invoke({"decompose", "--model", path});
  const auto b = invoke({"decompose", "--model", "fixture_2_8_2", "--seed", "0"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(invoke({"genfixture", "--widths", "2,8,2"}).out, invoke({"genfixture", "--widths", "2,8,2"}).out);
}

TEST(Cli, RepeatedRunsAreIdentical) {
  const std::vector<std::string> args{"why", "--model", "fixture_3_6_6_3", "--seed", "4", "--input", "0.2,-0.4,1.1",
                                      "--vrep", "--style", "vrep"};
  const auto a = invoke(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, invoke(args).out);
}

}  // namespace
}  // namespace polyex::cli
