#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bisg/best_response.hpp"

namespace bisg {

enum class Outcome { kCompromised, kDefended };
enum class Trend { kImproving, kStatic, kWorsening };

std::string to_string(Outcome o);
std::string to_string(Trend t);
Outcome outcome_from_string(const std::string& s);

struct AttackOutcome {
  Outcome outcome = Outcome::kDefended;
  double probability = 0.0;       // true most-vulnerable path probability
  std::vector<std::string> path;  // node ids, source first; empty when unreachable
};

// Draws the attack against the most vulnerable critical asset under the
// true (alpha = 1) edge probabilities.
AttackOutcome simulate_attack_outcome(const AttackGraph& graph,
                                      const std::vector<double>& edge_totals,
                                      std::uint64_t seed);
AttackOutcome simulate_attack_outcome(const Game& game, const InvestmentProfile& profile,
                                      std::uint64_t seed);

struct RoundRecord {
  int index = 0;                             // 1-based
  std::map<std::string, double> allocation;  // edge key -> units
  Outcome outcome = Outcome::kDefended;
  std::vector<std::string> path;
};

inline constexpr double kTrendThreshold = 0.05;  // units per round
inline constexpr double kFitTieTolerance = 1e-9;  // mean squared units

struct FitGrid {
  std::vector<double> alphas;  // default 0.05, 0.10, ..., 1.00
  std::vector<double> etas;    // default 0, 0.1, ..., floor(budget / |E|)
};

// The default grid for a budget spread over `edges` edges.
FitGrid default_fit_grid(double budget, std::size_t edges);

struct FitResult {
  double alpha_hat = 1.0;
  double eta_hat = 0.0;
  double residual = 0.0;  // mean over rounds of the squared L2 distance
  std::vector<double> per_round_alpha;
  double critical_slope = 0.0;  // least-squares slope of critical-edge units
  Trend trend = Trend::kStatic;
};

// Solver-optimal continuous allocation of `budget` units by a single defender
// controlling every edge, keyed by edge. Results are cached per graph.
std::map<std::string, double> predicted_allocation(const AttackGraph& graph, double budget,
                                                   double alpha, double eta,
                                                   const SolverConfig& solver = {});

// Grid search for (alpha, eta) on a network where one subject controls every
// edge. Ties within kFitTieTolerance go to larger alpha, then smaller eta.
FitResult fit_alpha_eta(const AttackGraph& graph, double budget,
                        const std::vector<RoundRecord>& rounds, const FitGrid& grid = {},
                        const SolverConfig& solver = {});

// Sign of the least-squares slope of `series` against 1..n, with the
// declared dead band.
Trend classify_trend(const std::vector<double>& series, double* slope = nullptr);

}  // namespace bisg
