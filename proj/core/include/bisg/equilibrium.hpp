#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bisg/best_response.hpp"

namespace bisg {

enum class DefenseMode { kIndividual, kJoint, kCentral };

std::string to_string(DefenseMode mode);
DefenseMode defense_mode_from_string(const std::string& s);

struct GameConfig {
  DefenseMode mode = DefenseMode::kIndividual;
  // Central mode only; defaults to the defenders' common alpha, else 1.
  std::optional<double> planner_alpha;
  double brd_tolerance = 1e-6;
  int brd_max_rounds = 500;
  std::vector<std::string> order;  // empty: id-sorted
};

struct EquilibriumResult {
  InvestmentProfile profile;      // aligned to the controls of the game played
  std::vector<double> edge_totals;
  std::map<std::string, double> perceived_loss;
  std::map<std::string, double> true_loss;
  double total_true_loss = 0.0;
  int rounds = 0;                 // sweeps that moved some coordinate
  bool converged = false;
};

// Every defender may invest on every edge of the graph.
Game joint_game(const Game& game);

EquilibriumResult best_response_dynamics(const Game& game, const GameConfig& config = {},
                                         const SolverConfig& solver = {});

struct PneCheck {
  bool is_pne = false;
  double max_improvement = 0.0;
  std::string defender;  // who gains the most
};

PneCheck is_pne(const Game& game, const InvestmentProfile& profile, double tol,
                const SolverConfig& solver = {});

struct SocialOptimum {
  std::vector<std::string> control_keys;  // union of the defenders' edges
  std::vector<double> x;
  std::vector<double> edge_totals;
  double planner_loss = 0.0;  // planner's own objective at the optimum
  bool converged = true;
};

// A single planner with the pooled budget, every edge some defender controls, eta = 0,
// minimizing the owner-weighted sum of all defenders' losses.
SocialOptimum social_optimum(const Game& game, double planner_alpha,
                             const SolverConfig& solver = {});

double default_planner_alpha(const Game& game);

// Total true loss of BRD over total true loss of the social optimum.
double central_vs_decentralized_ratio(const Game& game, const GameConfig& config = {},
                                      const SolverConfig& solver = {});

// Per-defender losses for arbitrary edge totals.
void fill_losses(const Game& game, EquilibriumResult& result);

}  // namespace bisg
