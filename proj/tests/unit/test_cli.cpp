#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bcot/cli/commands.hpp"
#include "bcot/cli/problem_file.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bcot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = bcot::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return (fs::path(BCOT_TEST_DATA_DIR) / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("bcot_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                 ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(CliSolve, HumanReport) {
  const auto r = run_cli({"solve", data("two_state.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("W_bc(0, 1) = 3.333333"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("converged: yes"), std::string::npos);
}

TEST(CliSolve, JsonReport) {
  const auto r = run_cli({"solve", data("two_state.json"), "--json"});
  ASSERT_EQ(r.code, 0);
  const auto doc = json::parse(r.out);
  EXPECT_NEAR(doc.at("w_bc")[0][1].get<double>(), 10.0 / 3, 1e-7);
  EXPECT_NEAR(doc.at("value").get<double>(), 10.0 / 3, 1e-7);
  EXPECT_TRUE(doc.at("converged").get<bool>());
  EXPECT_NEAR(doc.at("coupling").at("0").at("1")[0][1].get<double>(), 0.7, 1e-9);
  EXPECT_TRUE(doc.at("flags").at("possibly_infinite").empty());
}

TEST(CliSolve, DiscountedValue) {
  const auto r = run_cli({"solve", data("two_state_discounted.json"), "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out).at("w_bc")[0][1].get<double>(), 1.0 / 0.65, 1e-9);
}

TEST(CliSolve, CsvExport) {
  TempDir tmp;
  const auto csv = tmp.file("table.csv");
  ASSERT_EQ(run_cli({"solve", data("two_state.json"), "--csv", csv}).code, 0);
  const auto text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "state,0,1");
  EXPECT_NE(text.find("\n0,0,3.33333333"), std::string::npos) << text;
}

TEST(CliSolve, PeriodicKernelDoesNotConverge) {
  const auto r = run_cli({"solve", data("periodic.json"), "--json", "--max-iter", "3000"});
  EXPECT_EQ(r.code, 3);
  const auto doc = json::parse(r.out);
  EXPECT_FALSE(doc.at("converged").get<bool>());
  EXPECT_EQ(doc.at("w_bc")[0][1].get<double>(), 3000.0);
}

TEST(CliSolve, IterationCapExitsThree) {
  EXPECT_EQ(run_cli({"solve", data("two_state.json"), "--max-iter", "2"}).code, 3);
}

TEST(CliSolve, InputErrors) {
  auto r = run_cli({"solve", data("bad_row_sum.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("field 'P'"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("row 0"), std::string::npos) << r.err;
  r = run_cli({"solve", data("malformed.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"solve", data("does_not_exist.json")}).code, 2);
  EXPECT_EQ(run_cli({"solve"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
}

TEST(CliProblemFile, FieldDiagnostics) {
  using bcot::cli::InputError;
  using bcot::cli::parse_problem;
  const json base = json::parse(slurp(data("two_state.json")));
  auto doc = base;
  doc["x0"] = "7";
  EXPECT_THROW(parse_problem(doc), InputError);
  doc = base;
  doc["beta"] = 1.5;
  EXPECT_THROW(parse_problem(doc), InputError);
  doc = base;
  doc["cost"] = json::array({json::array({0, -1}), json::array({1, 0})});
  EXPECT_THROW(parse_problem(doc), InputError);
  doc = base;
  doc.erase("P");
  EXPECT_THROW(parse_problem(doc), InputError);
  const auto pf = parse_problem(base);
  EXPECT_TRUE(pf.discrete_cost);
  EXPECT_TRUE(pf.same_kernel);
  EXPECT_TRUE(pf.spec.is_coupling_time_instance());
}

TEST(CliHelp, ExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("solve"), std::string::npos);
}

TEST(CliCouple, PolicyValues) {
  auto r = run_cli({"couple", data("two_state.json"), "--kind", "wasserstein", "--json"});
  ASSERT_EQ(r.code, 0);
  auto doc = json::parse(r.out);
  EXPECT_NEAR(doc.at("value").get<double>(), 10.0 / 3, 1e-6);
  EXPECT_TRUE(doc.at("valid").get<bool>());
  EXPECT_TRUE(doc.at("sticky").get<bool>());

  r = run_cli({"couple", data("two_state.json"), "--kind", "classic"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("value(0, 1) = 3.846154"), std::string::npos) << r.out;

  r = run_cli({"couple", data("two_state.json"), "--kind", "independent", "--json"});
  doc = json::parse(r.out);
  EXPECT_EQ(doc.at("value"), "inf");
  EXPECT_FALSE(doc.at("sticky").get<bool>());
}

TEST(CliCouple, OptimalEqualsWasserstein) {
  const auto a = json::parse(run_cli({"couple", data("two_state.json"), "--kind", "optimal", "--json"}).out);
  const auto b = json::parse(run_cli({"couple", data("two_state.json"), "--kind", "wasserstein", "--json"}).out);
  for (const auto& x : {"0", "1"})
    for (const auto& xp : {"0", "1"})
      for (int y = 0; y < 2; ++y)
        for (int yp = 0; yp < 2; ++yp)
          EXPECT_NEAR(a["coupling"][x][xp][y][yp].get<double>(), b["coupling"][x][xp][y][yp].get<double>(), 1e-9);
}

TEST(CliCouple, ClassicNeedsSameKernel) {
  EXPECT_EQ(run_cli({"couple", data("two_kernels.json"), "--kind", "classic"}).code, 2);
  const auto r = run_cli({"couple", data("two_kernels.json"), "--kind", "wasserstein", "--json"});
  ASSERT_EQ(r.code, 0);
  const auto doc = json::parse(r.out);
  EXPECT_TRUE(doc.at("valid").get<bool>());
  EXPECT_TRUE(doc.at("sticky").is_null());
  EXPECT_EQ(run_cli({"couple", data("two_state.json"), "--kind", "bogus"}).code, 2);
}

TEST(CliNoncausal, GoldenTwoState) {
  const auto r = run_cli({"noncausal", data("two_state.json")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(data("golden/noncausal_two_state.txt")));
  EXPECT_NE(r.out.find("series value: 3.333333"), std::string::npos);
  EXPECT_NE(r.out.find("w formula:    1.111111  [caveat]"), std::string::npos);
}

TEST(CliNoncausal, JsonCarriesCaveatFlag) {
  const auto doc = json::parse(run_cli({"noncausal", data("two_state.json"), "--json"}).out);
  EXPECT_NEAR(doc["series"]["value"].get<double>(), 10.0 / 3, 1e-9);
  EXPECT_NEAR(doc["closed_forms"]["w_formula"].get<double>(), 10.0 / 9, 1e-12);
  EXPECT_NEAR(doc["closed_forms"]["w_bc_formula"].get<double>(), 10.0 / 3, 1e-12);
  EXPECT_TRUE(doc["closed_forms"]["w_formula_caveat"].get<bool>());
}

TEST(CliNoncausal, EdgeCases) {
  EXPECT_EQ(run_cli({"noncausal", data("periodic.json")}).code, 4);
  const auto r = run_cli({"noncausal", data("two_state_diagonal.json"), "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["series"]["value"].get<double>(), 0.0);
  EXPECT_EQ(run_cli({"noncausal", data("two_kernels.json")}).code, 2);
}

TEST(CliBound, DoeblinAndDp) {
  auto r = run_cli({"bound", data("two_state.json"), "--n", "100", "--t", "20", "--proxy", "doeblin", "--json"});
  ASSERT_EQ(r.code, 0);
  const auto doeblin = json::parse(r.out);
  EXPECT_NEAR(doeblin["bound"].get<double>(), 0.9735045119199434, 1e-12);
  r = run_cli({"bound", data("two_state.json"), "--n", "100", "--t", "20", "--proxy", "dp", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json::parse(r.out)["proxy"].get<double>(), doeblin["proxy"].get<double>(), 1e-6);
}

TEST(CliBound, Errors) {
  EXPECT_EQ(run_cli({"bound", data("two_state.json"), "--n", "100", "--t", "0.0"}).code, 2);
  EXPECT_EQ(run_cli({"bound", data("periodic.json"), "--n", "10", "--t", "1"}).code, 4);
  EXPECT_EQ(run_cli({"bound", data("two_state_discounted.json"), "--n", "10", "--t", "1", "--proxy", "series"}).code,
            2);
}

TEST(CliSimulate, WassersteinMeanAndDeterminism) {
  const std::vector<std::string> args{"simulate", data("two_state.json"), "--kind", "wasserstein",
                                      "--samples", "200000", "--seed", "42", "--json"};
  const auto a = run_cli(args);
  ASSERT_EQ(a.code, 0);
  const auto doc = json::parse(a.out);
  EXPECT_LE(std::abs(doc["mean"].get<double>() - 10.0 / 3), 3 * doc["std_error"].get<double>());
  EXPECT_EQ(run_cli(args).out, a.out);
  auto threaded = args;
  threaded.insert(threaded.begin(), {"--threads", "3"});
  EXPECT_EQ(run_cli(threaded).out, a.out);
}

TEST(CliSimulate, DiagonalStartAndWarning) {
  auto r = run_cli({"simulate", data("two_state_diagonal.json"), "--samples", "1000", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["mean"].get<double>(), 0.0);
  r = run_cli({"simulate", data("two_state.json"), "--kind", "independent", "--samples", "1000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(run_cli({"simulate", data("two_state.json"), "--samples", "0"}).code, 2);
}

TEST(CliVerify, RoundTripAndFailures) {
  TempDir tmp;
  const auto solved = tmp.file("solve.json");
  write(solved, run_cli({"solve", data("two_kernels.json"), "--json", "--tol", "1e-12"}).out);
  auto r = run_cli({"verify", data("two_kernels.json"), solved, solved});
  EXPECT_EQ(r.code, 0) << r.out << r.err;

  // Perturbed table.
  auto doc = json::parse(slurp(solved));
  doc["w_bc"][0][1] = doc["w_bc"][0][1].get<double>() + 1e-3;
  const auto perturbed = tmp.file("perturbed.json");
  write(perturbed, doc.dump());
  EXPECT_EQ(run_cli({"verify", data("two_kernels.json"), perturbed, solved}).code, 5);

  // Malformed inputs are input errors, not verification failures.
  const auto broken = tmp.file("broken.json");
  write(broken, "{\"w_bc\": [[0]]}");
  EXPECT_EQ(run_cli({"verify", data("two_kernels.json"), broken, solved}).code, 2);
}

TEST(CliVerify, IndependentCouplingIsSuboptimal) {
  TempDir tmp;
  const auto solved = tmp.file("solve.json");
  const auto coupling = tmp.file("independent.json");
  write(solved, run_cli({"solve", data("two_state.json"), "--json", "--tol", "1e-12"}).out);
  write(coupling, run_cli({"couple", data("two_state.json"), "--kind", "independent", "--json"}).out);
  EXPECT_EQ(run_cli({"verify", data("two_state.json"), solved, solved}).code, 0);
  const auto r = run_cli({"verify", data("two_state.json"), solved, coupling, "--json"});
  EXPECT_EQ(r.code, 5);
  EXPECT_FALSE(json::parse(r.out)["coupling_optimal"].get<bool>());
}
