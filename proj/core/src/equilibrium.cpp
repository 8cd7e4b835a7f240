#include "bisg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace bisg {

std::string to_string(DefenseMode mode) {
  switch (mode) {
    case DefenseMode::kJoint: return "joint";
    case DefenseMode::kCentral: return "central";
    case DefenseMode::kIndividual: break;
  }
  return "individual";
}

DefenseMode defense_mode_from_string(const std::string& s) {
  if (s == "individual") return DefenseMode::kIndividual;
  if (s == "joint") return DefenseMode::kJoint;
  if (s == "central") return DefenseMode::kCentral;
  throw ModelError("unknown defense mode '" + s + "'");
}

namespace {

// Every edge of the graph, naming mirrored copies by their original key.
std::vector<std::string> all_edge_keys(const Game& game) {
  const auto& g = game.graph();
  std::set<std::string> keys, derived;
  for (const auto& [key, copies] : game.mirror()) {
    keys.insert(key);
    derived.insert(copies.begin(), copies.end());
  }
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
    auto key = g.edge_key(e);
    if (!derived.count(key)) keys.insert(std::move(key));
  }
  return {keys.begin(), keys.end()};
}

std::vector<std::string> union_of_edges(const Game& game) {
  std::set<std::string> keys;
  for (const auto& d : game.defenders()) keys.insert(d.edges.begin(), d.edges.end());
  return {keys.begin(), keys.end()};
}

std::vector<std::size_t> sweep_order(const Game& game, const GameConfig& config) {
  std::vector<std::size_t> order;
  if (config.order.empty()) {
    for (std::size_t k = 0; k < game.size(); ++k) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return game.defender(a).id < game.defender(b).id;
    });
    return order;
  }
  std::set<std::size_t> seen;
  for (const auto& id : config.order) {
    const auto k = game.defender_index(id);
    if (!seen.insert(k).second) throw ModelError("defender order repeats '" + id + "'");
    order.push_back(k);
  }
  if (order.size() != game.size()) throw ModelError("defender order is not a permutation");
  return order;
}

}  // namespace

Game joint_game(const Game& game) {
  const auto keys = all_edge_keys(game);
  auto defenders = game.defenders();
  for (auto& d : defenders) d.edges = keys;
  return Game(game.graph(), std::move(defenders), game.mirror());
}

void fill_losses(const Game& game, EquilibriumResult& r) {
  const auto& g = game.graph();
  const auto truth = perceived_lengths(g, r.edge_totals, 1.0);
  r.total_true_loss = 0.0;
  for (std::size_t k = 0; k < game.size(); ++k) {
    const auto& d = game.defender(k);
    const double tl = weighted_loss(g, truth, game.assets(k));
    r.true_loss[d.id] = tl;
    r.total_true_loss += tl;
    r.perceived_loss[d.id] =
        d.alpha == 1.0 ? tl
                       : weighted_loss(g, perceived_lengths(g, r.edge_totals, d.alpha),
                                       game.assets(k));
  }
}

double default_planner_alpha(const Game& game) {
  if (game.size() == 0) return 1.0;
  const double a = game.defender(0).alpha;
  for (const auto& d : game.defenders()) {
    if (d.alpha != a) return 1.0;
  }
  return a;
}

SocialOptimum social_optimum(const Game& game, double planner_alpha,
                             const SolverConfig& solver) {
  SocialOptimum out;
  out.control_keys = union_of_edges(game);
  double budget = 0.0;
  for (const auto& d : game.defenders()) budget += d.budget;
  Game planner(game.graph(), {Defender{"planner", out.control_keys, budget, planner_alpha, 0.0}},
               game.mirror());

  AllocationProblem p;
  p.graph = &game.graph();
  p.base_totals.assign(game.graph().edge_count(), 0.0);
  p.controls = planner.controls(0);
  for (std::size_t k = 0; k < game.size(); ++k) {
    // Shared assets count once per owner.
    p.assets.insert(p.assets.end(), game.assets(k).begin(), game.assets(k).end());
  }
  p.alpha = planner_alpha;
  p.budget = budget;
  p.eta = 0.0;
  auto br = solve_allocation(p, solver);
  out.x = br.x;
  out.planner_loss = br.perceived_loss;
  out.converged = br.converged;
  InvestmentProfile prof;
  prof["planner"] = br.x;
  out.edge_totals = planner.edge_totals(prof);
  return out;
}

EquilibriumResult best_response_dynamics(const Game& input, const GameConfig& config,
                                         const SolverConfig& solver) {
  if (!(config.brd_tolerance > 0.0)) throw ModelError("brd tolerance must be positive");
  EquilibriumResult r;
  if (config.mode == DefenseMode::kCentral) {
    const double alpha = config.planner_alpha.value_or(default_planner_alpha(input));
    auto opt = social_optimum(input, alpha, solver);
    r.profile["planner"] = opt.x;
    r.edge_totals = opt.edge_totals;
    r.rounds = 1;
    r.converged = opt.converged;
    fill_losses(input, r);
    return r;
  }

  const Game game = config.mode == DefenseMode::kJoint ? joint_game(input) : input;
  const auto order = sweep_order(game, config);
  r.profile = game.uniform_profile();
  for (int sweep = 1; sweep <= config.brd_max_rounds; ++sweep) {
    double change = 0.0;
    for (std::size_t k : order) {
      const auto& id = game.defender(k).id;
      auto br = best_response(game, r.profile, id, solver);
      auto& x = r.profile[id];
      for (std::size_t c = 0; c < x.size(); ++c) change = std::max(change, std::abs(br.x[c] - x[c]));
      x = std::move(br.x);
    }
    if (change > config.brd_tolerance) r.rounds = sweep;
    // A lone defender's best response ignores its own previous play.
    if (change <= config.brd_tolerance || game.size() == 1) {
      r.rounds = std::max(r.rounds, 1);
      r.converged = true;
      break;
    }
  }
  r.edge_totals = game.edge_totals(r.profile);
  fill_losses(game, r);
  return r;
}

PneCheck is_pne(const Game& game, const InvestmentProfile& profile, double tol,
                const SolverConfig& solver) {
  PneCheck out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < game.size(); ++k) {
    const auto& id = game.defender(k).id;
    const double gain =
        perceived_total_loss(game, profile, id) - best_response(game, profile, id, solver).perceived_loss;
    if (gain > best) {
      best = gain;
      out.defender = id;
    }
  }
  // Solver noise can make a best response look marginally worse than play.
  out.max_improvement = std::max(0.0, best);
  out.is_pne = out.max_improvement <= tol;
  return out;
}

double central_vs_decentralized_ratio(const Game& game, const GameConfig& config,
                                      const SolverConfig& solver) {
  GameConfig decentral = config;
  if (decentral.mode == DefenseMode::kCentral) decentral.mode = DefenseMode::kIndividual;
  const auto brd = best_response_dynamics(game, decentral, solver);
  const double alpha = config.planner_alpha.value_or(default_planner_alpha(game));
  EquilibriumResult central;
  central.edge_totals = social_optimum(game, alpha, solver).edge_totals;
  fill_losses(game, central);
  return brd.total_true_loss / std::max(central.total_true_loss, 1e-12);
}

}  // namespace bisg
