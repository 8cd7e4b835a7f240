#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bisg/behavioral.hpp"

namespace bisg {

enum class SolverMethod { kInteriorPoint, kSubgradient };

struct SolverConfig {
  SolverMethod method = SolverMethod::kInteriorPoint;

  // Projected subgradient settings.
  int max_iters = 20000;
  double step_c = 1.0;            // steps c*B/sqrt(t) along the unit subgradient
  double tolerance = 1e-9;        // objective oscillation flagged above this
  double averaging_fraction = 0.25;
  double projection_tolerance = 1e-12;
  std::uint64_t seed = 0;
  int restarts = 3;

  // Interior-point settings.
  double barrier_gap = 1e-10;     // stop when (#barrier terms)/tau falls below
  double barrier_growth = 10.0;
  int max_newton_steps = 400;     // per centering
};

// One defender's allocation problem with everyone else frozen.
struct AllocationProblem {
  const AttackGraph* graph = nullptr;
  std::vector<double> base_totals;  // investment already on each edge
  std::vector<Control> controls;
  std::vector<AssetWeight> assets;
  double alpha = 1.0;
  double budget = 0.0;
  double eta = 0.0;
};

struct BestResponse {
  std::vector<double> x;
  double perceived_loss = 0.0;
  bool converged = true;
  int iterations = 0;
};

AllocationProblem make_problem(const Game& game, const InvestmentProfile& profile,
                               std::size_t k);

// Perceived loss of the problem's assets when the defender plays y.
double allocation_objective(const AllocationProblem& problem, std::span<const double> y);

// Euclidean projection onto {x >= eta, sum(x) <= budget}.
std::vector<double> project_feasible(std::span<const double> x, double budget,
                                     double eta);

BestResponse solve_allocation(const AllocationProblem& problem,
                              const SolverConfig& config = {});

// Defender k's best response to the other defenders' investments in profile
// (k's own entry is ignored).
BestResponse best_response(const Game& game, const InvestmentProfile& profile,
                           const std::string& defender,
                           const SolverConfig& config = {});

// Edge keys of the two-path graph, in the order closed_form_two_path uses.
inline const std::array<std::string, 6> kTwoPathEdges = {
    "vs->v1", "v1->v2", "v1->v3", "v2->v4", "v3->v4", "v4->v5"};

// Exact optimum of the two-path graph (p0 = 1) in kTwoPathEdges order.
// `sensitivities` must name exactly those six edges.
std::vector<double> closed_form_two_path(double alpha, double budget,
                                         const std::map<std::string, double>& sensitivities);

}  // namespace bisg
