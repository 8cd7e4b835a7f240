#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bisg/scenario.hpp"
#include "bisg/scenarios.hpp"
#include "cli.hpp"

using namespace bisg;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, NashSmoke) {
  const auto r = run({"nash", "--scenario", "der1", "--alpha", "1", "--budget", "20"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_TRUE(doc.at("converged").get<bool>());
  EXPECT_GT(doc.at("total_true_loss").get<double>(), 0.0);
  EXPECT_EQ(doc.at("defenders").size(), 2u);
}

TEST(Cli, NashCentralReportsPlanner) {
  const auto r = run({"nash", "--scenario", "scada", "--alpha", "0.6", "--mode", "central"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(json::parse(r.out).contains("planner"));
}

TEST(Cli, NonConvergenceExitCode) {
  const auto r = run({"nash", "--scenario", "der1", "--alpha", "0.6", "--budget-split", "0.3",
                      "--max-rounds", "1", "--tolerance", "1e-15"});
  EXPECT_EQ(r.code, cli::kExitNoConvergence);
  EXPECT_FALSE(json::parse(r.out).at("converged").get<bool>());
}

TEST(Cli, SolveSingleDefender) {
  const auto r = run({"solve", "--scenario", "fig4a", "--alpha", "1", "--budget", "10"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  const auto& x = doc.at("investments");
  EXPECT_NEAR(x.at("vs->v1").get<double>() + x.at("v4->v5").get<double>(), 10.0, 1e-3);
  EXPECT_NEAR(doc.at("true_loss").get<double>(), std::exp(-10.0), 1e-8);
}

TEST(Cli, CompareBaselineRatioGrowsAsAlphaFalls) {
  const auto r = run({"compare-baseline", "--scenario", "der1", "--alphas", "0.4..1.0"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0][3], "ratio");
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ratio = std::stod(rows[i][3]);
    EXPECT_GE(ratio, prev - 1e-6) << rows[i][0];
    prev = ratio;
  }
  EXPECT_EQ(rows[1][0], "1");
  EXPECT_EQ(rows.back()[0], "0.4");
}

TEST(Cli, TransformSplitsTarget) {
  const auto path = temp("bisg_cli_khop.json");
  const auto r = run({"transform", "--scenario", "fig4a", "--khop", "v5=2", "--out", path.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto sc = load_scenario(path);
  EXPECT_TRUE(sc.graph.find_node("v4^a").has_value());
  EXPECT_TRUE(sc.graph.find_node("v4^b").has_value());
  EXPECT_EQ(sc.mirror.at("v4->v5").size(), 2u);
  EXPECT_NO_THROW(sc.game());
  std::filesystem::remove(path);
}

TEST(Cli, ExperimentWritesCsv) {
  const auto spec = temp("bisg_cli_spec.json");
  const auto csv = temp("bisg_cli_out.csv");
  std::ofstream(spec) << R"({"scenario":"der1","sweep":"budget","values":[10,20],"alphas":[1]})";
  const auto r = run({"experiment", "--spec", spec.string(), "--out", csv.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(csv);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(csv_rows(ss.str()).size(), 1u + 2u * 3u);
  std::filesystem::remove(spec);
  std::filesystem::remove(csv);
}

TEST(Cli, ExperimentFlaggedRowsStillSucceed) {
  const auto spec = temp("bisg_cli_bad_spec.json");
  std::ofstream(spec) << R"({"scenario":"der1","sweep":"interdependency_links","values":[2,99]})";
  const auto r = run({"experiment", "--spec", spec.string()});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("error: "), std::string::npos);
  std::filesystem::remove(spec);
}

TEST(Cli, FitFromRoundsFile) {
  const auto path = temp("bisg_cli_rounds.json");
  json rounds = json::array();
  for (int i = 1; i <= 3; ++i)
    rounds.push_back({{"round", i},
                      {"allocation", {{"v1->v2", 0}, {"v1->v3", 0}, {"v2->v4", 0}, {"v3->v4", 0}, {"v4->v5", 24}}}});
  std::ofstream(path) << json{{"network", "A"}, {"unit_budget", 24}, {"rounds", rounds}}.dump();
  const auto r = run({"fit", "--rounds", path.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("alpha_hat").get<double>(), 1.0);
  EXPECT_EQ(doc.at("trend"), "static");
  std::filesystem::remove(path);
}

TEST(Cli, ValidateReportsProblems) {
  auto sc = build_two_path();
  sc.defenders[0].edges.push_back("v5->v9");
  const auto path = temp("bisg_cli_invalid.json");
  save_scenario(sc, path);
  const auto r = run({"validate", "--scenario", path.string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_FALSE(json::parse(r.out).at("ok").get<bool>());
  EXPECT_EQ(run({"validate", "--scenario", "scada"}).code, cli::kExitOk);
  std::filesystem::remove(path);
}

TEST(Cli, UsageAndDataErrors) {
  auto r = run({});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_EQ(json::parse(r.err).at("error").at("code"), "usage");
  EXPECT_EQ(run({"nash", "--alpha", "1.5"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"nash", "--mode", "anarchy"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"compare-baseline", "--alphas", "1.0..0.4"}).code, cli::kExitUsage);
  r = run({"nash", "--scenario", "missing.json"});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_EQ(json::parse(r.err).at("error").at("code"), "data");
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, DeterministicGivenSeed) {
  const std::vector<std::string> args = {"nash", "--scenario", "scada", "--alpha", "0.6", "--seed", "5"};
  EXPECT_EQ(run(args).out, run(args).out);
}
