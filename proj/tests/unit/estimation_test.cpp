#include <gtest/gtest.h>

#include <cmath>

#include "bisg/estimation.hpp"
#include "bisg/scenarios.hpp"

using namespace bisg;

namespace {

AttackGraph single_edge(double p0) {
  return AttackGraph({{"S", "", NodeKind::kSource}, {"T", "", NodeKind::kCritical}},
                     {{"S", "T", p0, 1.0, ""}}, {"S"}, {{"T", 1.0, {"D"}}});
}

std::vector<RoundRecord> replay(const std::map<std::string, double>& allocation, int n) {
  std::vector<RoundRecord> rounds;
  for (int i = 1; i <= n; ++i) rounds.push_back({i, allocation, Outcome::kDefended, {}});
  return rounds;
}

std::vector<RoundRecord> critical_series(const std::vector<double>& critical) {
  std::vector<RoundRecord> rounds;
  int i = 0;
  for (double c : critical) {
    const double rest = (24.0 - c) / 4.0;
    rounds.push_back({++i,
                      {{"v1->v2", rest}, {"v1->v3", rest}, {"v2->v4", rest}, {"v3->v4", rest},
                       {"v4->v5", c}},
                      Outcome::kDefended,
                      {}});
  }
  return rounds;
}

const AttackGraph& network(const std::string& name) {
  static const AttackGraph a = build_session_network("A").graph;
  static const AttackGraph b = build_session_network("B").graph;
  return name == "A" ? a : b;
}

}  // namespace

TEST(SimulateAttack, CertainCompromise) {
  const auto g = single_edge(1.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = simulate_attack_outcome(g, {0.0}, seed);
    EXPECT_EQ(out.outcome, Outcome::kCompromised);
    EXPECT_EQ(out.path, (std::vector<std::string>{"S", "T"}));
    EXPECT_DOUBLE_EQ(out.probability, 1.0);
  }
}

TEST(SimulateAttack, UnreachableTargetIsDefended) {
  const AttackGraph g({{"S", "", NodeKind::kSource},
                       {"X", "", NodeKind::kIntermediate},
                       {"T", "", NodeKind::kCritical}},
                      {{"S", "X", 1.0, 1.0, ""}}, {"S"}, {{"T", 1.0, {"D"}}});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = simulate_attack_outcome(g, {0.0}, seed);
    EXPECT_EQ(out.outcome, Outcome::kDefended);
    EXPECT_TRUE(out.path.empty());
    EXPECT_EQ(out.probability, 0.0);
  }
}

TEST(SimulateAttack, DeterministicGivenSeed) {
  const auto g = single_edge(0.5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(simulate_attack_outcome(g, {0.0}, seed).outcome,
              simulate_attack_outcome(g, {0.0}, seed).outcome);
  }
}

TEST(SimulateAttack, MonteCarloMatchesPathProbability) {
  const auto g = single_edge(0.5);
  int hits = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    hits += simulate_attack_outcome(g, {0.0}, static_cast<std::uint64_t>(i)).outcome ==
            Outcome::kCompromised;
  }
  EXPECT_NEAR(hits / static_cast<double>(draws), 0.5, 0.02);
}

TEST(SimulateAttack, FullBudgetOnCriticalEdgeIsDefended) {
  const auto& g = network("A");
  std::vector<double> totals(g.edge_count(), 0.0);
  totals.back() = 24.0;  // v4->v5
  const auto out = simulate_attack_outcome(g, totals, 3);
  EXPECT_NEAR(out.probability, std::exp(-24.0), 1e-20);
  EXPECT_EQ(out.outcome, Outcome::kDefended);
}

TEST(SimulateAttack, GameOverloadChecksFeasibility) {
  const auto game = build_session_network("A").game();
  auto prof = game.zero_profile();
  prof["subject"] = {10, 10, 10, 10, 10};
  EXPECT_THROW(simulate_attack_outcome(game, prof, 1), InfeasibleError);
}

TEST(Trend, Classification) {
  double slope = 0.0;
  EXPECT_EQ(classify_trend({1, 2, 3, 4}, &slope), Trend::kImproving);
  EXPECT_NEAR(slope, 1.0, 1e-12);
  EXPECT_EQ(classify_trend({4, 3, 2, 1}), Trend::kWorsening);
  EXPECT_EQ(classify_trend({2, 2, 2, 2}), Trend::kStatic);
  EXPECT_EQ(classify_trend({5}), Trend::kStatic);
  EXPECT_EQ(classify_trend({0.0, 0.04}), Trend::kStatic);
}

TEST(FitGridDefaults, Shape) {
  const auto g = default_fit_grid(24, 5);
  ASSERT_EQ(g.alphas.size(), 20u);
  EXPECT_NEAR(g.alphas.front(), 0.05, 1e-12);
  EXPECT_NEAR(g.alphas.back(), 1.0, 1e-12);
  ASSERT_EQ(g.etas.size(), 41u);
  EXPECT_NEAR(g.etas.back(), 4.0, 1e-12);
}

TEST(Fit, EmptyRoundsRejected) {
  EXPECT_THROW(fit_alpha_eta(network("A"), 24, {}), ModelError);
}

TEST(Fit, UnspentBudgetRejected) {
  auto rounds = critical_series({24});
  rounds[0].allocation["v4->v5"] = 23;
  EXPECT_THROW(fit_alpha_eta(network("A"), 24, rounds), ModelError);
}

TEST(Fit, RecoversBehavioralLevelOnNetworkA) {
  const auto& g = network("A");
  const auto rounds = replay(predicted_allocation(g, 24, 0.6, 0.0), 10);
  const auto fit = fit_alpha_eta(g, 24, rounds);
  EXPECT_GE(fit.alpha_hat, 0.55);
  EXPECT_LE(fit.alpha_hat, 0.65);
  EXPECT_EQ(fit.eta_hat, 0.0);
  EXPECT_LE(fit.residual, 1e-9);
  ASSERT_EQ(fit.per_round_alpha.size(), 10u);
  for (double a : fit.per_round_alpha) EXPECT_NEAR(a, fit.alpha_hat, 1e-12);
  EXPECT_EQ(fit.trend, Trend::kStatic);
}

TEST(Fit, RationalAllocationGivesAlphaOne) {
  const auto& g = network("A");
  const auto fit = fit_alpha_eta(g, 24, critical_series({24, 24, 24}));
  EXPECT_EQ(fit.alpha_hat, 1.0);
  EXPECT_EQ(fit.eta_hat, 0.0);
  EXPECT_LE(fit.residual, 1e-9);
}

TEST(Fit, UniformSpreadingGivesMaximalEta) {
  const auto& g = network("A");
  const auto fit = fit_alpha_eta(g, 24, critical_series({4.8, 4.8}));
  EXPECT_NEAR(fit.eta_hat, 4.0, 1e-12);
}

TEST(Fit, NoCrossOverInvestmentGivesZeroEta) {
  const auto& g = network("B");
  const std::map<std::string, double> alloc = {
      {"v1->v2", 6}, {"v1->v3", 6}, {"v2->v3", 0}, {"v2->v4", 6}, {"v3->v4", 6}};
  const auto fit = fit_alpha_eta(g, 24, replay(alloc, 10));
  EXPECT_EQ(fit.eta_hat, 0.0);
  EXPECT_LE(fit.residual, 1e-9);
  // Every alpha predicts zero on the cross-over edge at eta = 0.
  for (double a : {0.2, 0.6, 1.0}) {
    EXPECT_NEAR(predicted_allocation(g, 24, a, 0.0).at("v2->v3"), 0.0, 1e-6) << a;
  }
}

TEST(Fit, LearningTrendFromCriticalEdge) {
  const auto& g = network("A");
  FitGrid coarse{{0.5, 1.0}, {0.0}};
  EXPECT_EQ(fit_alpha_eta(g, 24, critical_series({8, 10, 12, 14}), coarse).trend, Trend::kImproving);
  EXPECT_EQ(fit_alpha_eta(g, 24, critical_series({14, 12, 10, 8}), coarse).trend, Trend::kWorsening);
  EXPECT_EQ(fit_alpha_eta(g, 24, critical_series({10, 10, 10}), coarse).trend, Trend::kStatic);
}

TEST(Fit, PerRoundAlphaTracksEachRound) {
  const auto& g = network("A");
  FitGrid grid{{0.3, 0.6, 1.0}, {0.0}};
  std::vector<RoundRecord> rounds = {
      {1, predicted_allocation(g, 24, 0.3, 0.0), Outcome::kDefended, {}},
      {2, predicted_allocation(g, 24, 0.6, 0.0), Outcome::kDefended, {}},
      {3, predicted_allocation(g, 24, 1.0, 0.0), Outcome::kDefended, {}}};
  const auto fit = fit_alpha_eta(g, 24, rounds, grid);
  ASSERT_EQ(fit.per_round_alpha.size(), 3u);
  EXPECT_NEAR(fit.per_round_alpha[0], 0.3, 1e-12);
  EXPECT_NEAR(fit.per_round_alpha[1], 0.6, 1e-12);
  EXPECT_NEAR(fit.per_round_alpha[2], 1.0, 1e-12);
  EXPECT_EQ(fit.trend, Trend::kImproving);
}

TEST(Fit, UnknownEdgeRejected) {
  auto rounds = critical_series({24});
  rounds[0].allocation["v9->v1"] = 0;
  EXPECT_THROW(fit_alpha_eta(network("A"), 24, rounds), ModelError);
}

TEST(OutcomeNames, RoundTrip) {
  EXPECT_EQ(outcome_from_string(to_string(Outcome::kCompromised)), Outcome::kCompromised);
  EXPECT_EQ(outcome_from_string(to_string(Outcome::kDefended)), Outcome::kDefended);
  EXPECT_THROW(outcome_from_string("maybe"), ModelError);
  EXPECT_EQ(to_string(Trend::kImproving), "improving");
}
