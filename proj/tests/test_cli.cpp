#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "lfgeom");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = lfgeom::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, ZooList) {
  Result r = run({"zoo", "list"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "minkowski\nde_sitter\nproduct_hyperbolic\nproduct_sphere\nflat_finsler\nperturbed_finsler\n");
  Result j = run({"zoo", "list", "--json"});
  EXPECT_EQ(nlohmann::json::parse(j.out).size(), 6u);
}

TEST(Cli, ClassifyAndMetric) {
  Result r = run({"classify", "--model", "minkowski", "--x", "0,0", "--v", "1,1"});
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["kind"], "lightlike");
  EXPECT_EQ(j["orientation"], "future");
  Result m = run({"metric", "--model", R"({"name":"de_sitter","dim":3})", "--x", "[0,0,0]", "--v", "[1,0,0]"});
  ASSERT_EQ(m.code, 0);
  EXPECT_EQ(nlohmann::json::parse(m.out)["g"][0][0], -1.0);
}

TEST(Cli, Geodesic) {
  Result r = run({"geodesic", "--model", "minkowski", "--from", "0,0", "--to", "2,1"});
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["tau"].get<double>(), std::sqrt(3.0), 1e-9);
  EXPECT_EQ(j["path_csv"].get<std::string>().substr(0, 14), "t,x0,x1,v0,v1\n");
}

TEST(Cli, VerifyExitCodes) {
  EXPECT_EQ(run({"verify", "all", "--model", "minkowski", "--seed", "42", "--pairs", "3"}).code, 0);
  Result bad = run({"verify", "concavity", "--model", "product_sphere", "--seed", "42"});
  EXPECT_EQ(bad.code, 1);
  auto j = nlohmann::json::parse(bad.out);
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_FALSE(j["witness"].is_null());
  EXPECT_TRUE(j["runtime_ms"].is_null());
  EXPECT_EQ(run({"verify", "all", "--model", R"({"name":"minkowski","radius":-1})"}).code, 2);
  EXPECT_EQ(run({"verify", "nothing", "--model", "minkowski"}).code, 2);
  Result unknown = run({"classify", "--model", "kerr", "--x", "0,0", "--v", "1,0"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("unknown-name"), std::string::npos);
}

TEST(Cli, CurvatureScanCsv) {
  Result r = run({"curvature-scan", "--model", "de_sitter", "--samples", "4", "--seed", "3", "--out", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "x0,x1,v0,v1,w0,w1,K");
  Result j = run({"curvature-scan", "--model", "de_sitter", "--samples", "4", "--seed", "3", "--json"});
  EXPECT_NEAR(nlohmann::json::parse(j.out)["min_K"].get<double>(), 1.0, 1e-4);
}

TEST(Cli, VarianceDemo) {
  Result r = run({"variance-demo", "--space", R"({"dim":2,"norm":"euclidean"})", "--mu",
                  R"({"atoms":[[0,0],[2,0]],"weights":[0.5,0.5]})", "--nu", R"({"atoms":[[0,3],[2,3]]})",
                  "--grid", "5", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["verdict"], "pass");
}

TEST(Cli, BerwaldCheck) {
  EXPECT_EQ(run({"berwald-check", "--model", "flat_finsler", "--points", "3", "--dirs", "4"}).code, 0);
  Result r = run({"berwald-check", "--model", "perturbed_finsler", "--points", "3", "--dirs", "4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_GT(nlohmann::json::parse(r.out)["max_deviation"].get<double>(), 1e-4);
}
