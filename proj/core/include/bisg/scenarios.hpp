#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bisg/equilibrium.hpp"
#include "bisg/scenario.hpp"

namespace bisg {

struct Der1Options {
  int interdependency_links = 2;  // 2..12 criss-cross edges between chains
  int n_defenders = 2;            // replicas of the PV/EV pair
  double total_budget = 20.0;
  double budget_split = 0.5;      // fraction of the total held by the first defender
  double alpha = 1.0;
  double eta = 0.0;
  double per_defender_budget = 0.0;  // > 0 overrides total_budget/split
  std::map<std::string, double> sensitivity;  // edge key -> s
  std::map<std::string, double> loss;         // critical node -> L
};

struct ScadaOptions {
  int rtus_per_control = 3;       // 3..18
  int interdependency = 0;        // 0..3
  double total_budget = 20.0;
  double budget_split = 0.5;
  double alpha = 1.0;
  double eta = 0.0;
  std::map<std::string, double> sensitivity;
  std::map<std::string, double> loss;
};

Scenario build_der1(const Der1Options& options = {});
Scenario build_scada(const ScadaOptions& options = {});
// The two-path graph with a single defender controlling every edge.
Scenario build_two_path(double budget = 10.0, double alpha = 1.0, double eta = 0.0);
// Session networks: "A" (single critical edge) and "B" (cross-over edge),
// p0 = 1 and s = 1 throughout.
Scenario build_session_network(const std::string& name, double budget = 24.0,
                               double alpha = 1.0, double eta = 0.0);

// Bundled scenario by name: der1, scada, fig4a, fig4b, A, B.
Scenario bundled_scenario(const std::string& name);

enum class ReplicationMode { kDefenders, kRtus };

// Rebuilds a bundled DER.1 or SCADA scenario with n defender subnetworks or
// n RTUs per control unit, keeping every other builder parameter.
Scenario replicate_scenario(const Scenario& scenario, int n, ReplicationMode mode);

struct BaselineAllocation {
  InvestmentProfile profile;
  std::map<std::string, bool> fallback;  // defender -> no usable cut edge
};

// Each defender splits her budget equally over the union of the minimum cuts
// (up to the enumeration limit) of her own edges separating the sources from
// her assets. When no such cut exists she uses the edges she controls in the
// unrestricted minimum cuts.
BaselineAllocation mincut_baseline_allocation(const Game& game);

// Replaces every p0 with a draw from N(p0, sigma) restricted to (0, 1].
AttackGraph perturb_baselines(const AttackGraph& graph, double sigma, std::uint64_t seed);

// Non-critical edges are those not entering a critical asset.
bool enters_critical(const AttackGraph& graph, EdgeIndex e);

}  // namespace bisg
