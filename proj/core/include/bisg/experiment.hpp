#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bisg/scenarios.hpp"

namespace bisg {

enum class SweepVariable {
  kBudget,
  kAlpha,
  kBudgetSplit,
  kInterdependencyLinks,
  kDefenders,
  kRtus,
  kSensitivityRatio,
  kSigma,
};

std::string to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

// Modes compared in a sweep: individual, joint, central, mincut_baseline.
struct ExperimentSpec {
  std::string scenario = "der1";  // bundled name or a scenario file path
  SweepVariable sweep = SweepVariable::kBudget;
  std::vector<double> values;
  std::map<std::string, double> fixed;  // builder parameters held constant
  std::vector<double> alphas;           // empty: fixed "alpha" or the scenario's own
  std::vector<std::string> modes = {"individual"};
  std::uint64_t seed = 0;
  int replications = 1;  // sigma sweeps only
};

struct ExperimentRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string mode;
  double alpha = 1.0;
  double eta = 0.0;
  std::string defender_id;  // "TOTAL" for the system row
  double true_loss = 0.0;
  double perceived_loss = 0.0;
  bool converged = false;
  std::uint64_t seed = 0;
  // Sigma sweeps: |loss - unperturbed loss| / unperturbed loss.
  double relative_difference = 0.0;
  // Share of the invested budget placed on edges not entering a critical asset.
  double noncritical_fraction = 0.0;
  std::string note;  // baseline fallbacks, or "error: ..." for a failed row
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
};

ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);

// Builds der1/scada from parameters. Other bundled names and scenario files
// take the overrides that make sense for any scenario (alpha, eta,
// total_budget, budget_split).
Scenario build_experiment_scenario(const std::string& scenario,
                                   const std::map<std::string, double>& params);

// Scales every non-critical edge's sensitivity to `ratio` and every edge
// entering a critical asset to 1.
Scenario with_sensitivity_ratio(const Scenario& scenario, double ratio);

ExperimentResult run_experiment(const ExperimentSpec& spec, const GameConfig& game = {},
                                const SolverConfig& solver = {});

// Mean relative_difference of TOTAL rows matching a sweep value, mode and alpha.
double mean_relative_difference(const ExperimentResult& result, double sweep_value,
                                const std::string& mode, double alpha);

// TOTAL row for the given point; throws std::out_of_range when absent.
const ExperimentRow& total_row(const ExperimentResult& result, double sweep_value,
                               const std::string& mode, double alpha);

void write_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace bisg
