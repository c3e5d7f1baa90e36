#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "lipsum/json_io.hpp"

using lipsum::Json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lipsum");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = lipsum::cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data_file(const char* name) { return (std::filesystem::path(LIPSUM_TEST_DATA) / name).string(); }

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lipsum_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

double num(const Json& j) { return lipsum::json_number(j, "value"); }

}  // namespace

TEST(Cli, SummingLambdaTwo) {
  const auto r = run({"summing", "--p", "2", data_file("lambda2.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = lipsum::parse_json(r.out);
  EXPECT_EQ(j["tool"], "lipsum");
  EXPECT_EQ(j["config"]["command"], "summing");
  EXPECT_NEAR(num(j["result"]["constant"]), 1.0, 0.05);
  EXPECT_LE(num(j["result"]["report"]["certified_lower"]), 1.0 + 1e-12);
  EXPECT_GE(num(j["result"]["report"]["certified_lower"]), 0.95);
}

TEST(Cli, HsZero) {
  const auto r = run({"hs", data_file("zero.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(num(lipsum::parse_json(r.out)["result"]["hs_norm"]), 0.0);
}

TEST(Cli, NormDnormRestrictPoly) {
  EXPECT_EQ(run({"norm", data_file("lambda2.json")}).code, 0);
  const auto mixed = scratch("mixed.json");
  ASSERT_EQ(run({"gen", "--kind", "mixed", "--dims", "2,2", "--codomain", "2", "--seed", "3", "--json-out",
                 mixed.string()}).code, 0);
  const auto d = run({"dnorm", "--p", "2", mixed.string()});
  ASSERT_EQ(d.code, 0) << d.err;
  const Json dj = lipsum::parse_json(d.out);
  EXPECT_LE(num(dj["result"]["lower"]["certified_lower"]), num(dj["result"]["upper"]["certified_upper"]) + 1e-7);

  const auto op = scratch("op3.json");
  ASSERT_EQ(run({"gen", "--kind", "operator", "--dims", "2,2,2", "--codomain", "1", "--json-out", op.string()}).code, 0);
  const auto rr = run({"restrict", "--fix", "2=0.6,0.8", op.string()});
  ASSERT_EQ(rr.code, 0) << rr.err;
  EXPECT_TRUE(lipsum::parse_json(rr.out)["result"]["holds"].get<bool>());

  const auto p = run({"poly", "--p", "2", data_file("lambda3.json")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NEAR(num(lipsum::parse_json(p.out)["result"]["constant"]), 1.0, 0.05);
}

TEST(Cli, InputErrorsExitTwo) {
  const auto malformed = run({"norm", data_file("malformed.json")});
  EXPECT_EQ(malformed.code, 2);
  EXPECT_NE(malformed.err.find("line"), std::string::npos) << malformed.err;
  EXPECT_EQ(run({"norm", data_file("bad_shape.json")}).code, 2);
  EXPECT_EQ(run({"norm", data_file("does_not_exist.json")}).code, 2);
  EXPECT_EQ(run({"summing", "--p", "0.5", data_file("lambda2.json")}).code, 2);
  EXPECT_EQ(run({"summing", "--tol", "1.5", data_file("lambda2.json")}).code, 2);
  EXPECT_EQ(run({"summing", "--budget-rounds", "0", data_file("lambda2.json")}).code, 2);
  EXPECT_EQ(run({"summing", "--no-such-flag", data_file("lambda2.json")}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"restrict", "--fix", "5=1", data_file("lambda2.json")}).code, 2);
}

TEST(Cli, JsonOutMatchesStdout) {
  const auto path = scratch("summing.json");
  const auto r = run({"summing", "--p", "1", "--json-out", path.string(), data_file("lambda2.json")});
  ASSERT_EQ(r.code, 0);
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  EXPECT_EQ(s.str(), r.out);
}

TEST(Cli, ReportsAreDeterministicAcrossThreads) {
  const auto a = run({"summing", "--p", "2", "--seed", "5", "--threads", "1", data_file("lambda3.json")});
  const auto b = run({"summing", "--p", "2", "--seed", "5", "--threads", "3", data_file("lambda3.json")});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run({"gen", "--seed", "9"}).out, run({"gen", "--seed", "9"}).out);
  EXPECT_NE(run({"gen", "--seed", "9"}).out, run({"gen", "--seed", "10"}).out);
}

TEST(Cli, VerifyCoversEveryModule) {
  const auto r = run({"verify", "--seed", "7", "--trials", "1"});
  ASSERT_EQ(r.code, 0) << r.out;
  const Json j = lipsum::parse_json(r.out);
  EXPECT_TRUE(j["result"]["pass"].get<bool>());
  std::set<std::string> modules;
  for (const auto& p : j["result"]["properties"]) modules.insert(p["module"].get<std::string>());
  EXPECT_EQ(modules, (std::set<std::string>{"tensor-core", "form-norm", "summing-estimator", "hilbert-schmidt",
                                            "tensor-norm-dp", "cli-harness"}));
}
