#include "bisg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "parallel.hpp"

namespace bisg {

using nlohmann::json;

namespace {

const std::vector<std::pair<SweepVariable, std::string>> kSweepNames = {
    {SweepVariable::kBudget, "budget"},
    {SweepVariable::kAlpha, "alpha"},
    {SweepVariable::kBudgetSplit, "budget_split"},
    {SweepVariable::kInterdependencyLinks, "interdependency_links"},
    {SweepVariable::kDefenders, "n_defenders"},
    {SweepVariable::kRtus, "n_rtus"},
    {SweepVariable::kSensitivityRatio, "sensitivity_ratio"},
    {SweepVariable::kSigma, "sigma"},
};

const std::set<std::string> kModes = {"individual", "joint", "central", "mincut_baseline"};

int as_int(double v, const std::string& key) {
  if (v != std::floor(v)) throw ScenarioError(key + " must be an integer");
  return static_cast<int>(v);
}

Der1Options der1_options(const std::map<std::string, double>& params) {
  Der1Options o;
  for (const auto& [k, v] : params) {
    if (k == "interdependency_links") o.interdependency_links = as_int(v, k);
    else if (k == "n_defenders") o.n_defenders = as_int(v, k);
    else if (k == "total_budget") o.total_budget = v;
    else if (k == "budget_split") o.budget_split = v;
    else if (k == "alpha") o.alpha = v;
    else if (k == "eta") o.eta = v;
    else if (k == "per_defender_budget") o.per_defender_budget = v;
    else throw ScenarioError("unknown der1 parameter '" + k + "'");
  }
  return o;
}

ScadaOptions scada_options(const std::map<std::string, double>& params) {
  ScadaOptions o;
  for (const auto& [k, v] : params) {
    if (k == "rtus_per_control") o.rtus_per_control = as_int(v, k);
    else if (k == "interdependency") o.interdependency = as_int(v, k);
    else if (k == "total_budget") o.total_budget = v;
    else if (k == "budget_split") o.budget_split = v;
    else if (k == "alpha") o.alpha = v;
    else if (k == "eta") o.eta = v;
    else throw ScenarioError("unknown scada parameter '" + k + "'");
  }
  return o;
}

// Builder parameter driven by a sweep variable, if any.
std::string sweep_param(SweepVariable v, const std::string& scenario) {
  switch (v) {
    case SweepVariable::kBudget: return "total_budget";
    case SweepVariable::kAlpha: return "alpha";
    case SweepVariable::kBudgetSplit: return "budget_split";
    case SweepVariable::kInterdependencyLinks:
      return scenario == "scada" ? "interdependency" : "interdependency_links";
    case SweepVariable::kDefenders: return "n_defenders";
    case SweepVariable::kRtus: return "rtus_per_control";
    case SweepVariable::kSensitivityRatio:
    case SweepVariable::kSigma: break;
  }
  return "";
}

double noncritical_fraction(const AttackGraph& g, const std::vector<double>& totals) {
  double all = 0.0, nc = 0.0;
  for (EdgeIndex e = 0; e < totals.size(); ++e) {
    all += totals[e];
    if (!enters_critical(g, e)) nc += totals[e];
  }
  return all > 0.0 ? nc / all : 0.0;
}

struct ModeOutcome {
  EquilibriumResult result;
  std::string note;
};

ModeOutcome play(const Game& game, const std::string& mode, const GameConfig& base,
                 const SolverConfig& solver) {
  ModeOutcome out;
  if (mode == "mincut_baseline") {
    auto b = mincut_baseline_allocation(game);
    out.result.profile = b.profile;
    out.result.edge_totals = game.edge_totals(b.profile);
    out.result.converged = true;
    fill_losses(game, out.result);
    for (const auto& [id, flagged] : b.fallback) {
      if (flagged) out.note += (out.note.empty() ? "fallback: " : ",") + id;
    }
    return out;
  }
  GameConfig cfg = base;
  cfg.mode = defense_mode_from_string(mode);
  out.result = best_response_dynamics(game, cfg, solver);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::string to_string(SweepVariable v) {
  for (const auto& [var, name] : kSweepNames) {
    if (var == v) return name;
  }
  return "budget";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
  for (const auto& [var, name] : kSweepNames) {
    if (name == s) return var;
  }
  if (s == "BT") return SweepVariable::kBudget;
  throw ScenarioError("unknown sweep variable '" + s + "'");
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  try {
    ExperimentSpec spec;
    spec.scenario = doc.value("scenario", "der1");
    spec.sweep = sweep_variable_from_string(doc.at("sweep").get<std::string>());
    spec.values = doc.at("values").get<std::vector<double>>();
    if (doc.contains("fixed")) spec.fixed = doc.at("fixed").get<std::map<std::string, double>>();
    if (doc.contains("alphas")) spec.alphas = doc.at("alphas").get<std::vector<double>>();
    if (doc.contains("modes")) spec.modes = doc.at("modes").get<std::vector<std::string>>();
    spec.seed = doc.value("seed", std::uint64_t{0});
    spec.replications = doc.value("replications", 1);
    return spec;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open experiment spec " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str());
}

Scenario build_experiment_scenario(const std::string& scenario,
                                   const std::map<std::string, double>& params) {
  if (scenario == "der1") return build_der1(der1_options(params));
  if (scenario == "scada") return build_scada(scada_options(params));

  static const std::set<std::string> kFixedBundles = {"fig4a", "fig4b", "A", "B"};
  Scenario sc = kFixedBundles.count(scenario) ? bundled_scenario(scenario) : load_scenario(scenario);
  double total = 0.0;
  for (const auto& d : sc.defenders) total += d.budget;
  for (const auto& [k, v] : params) {
    if (k == "alpha") {
      for (auto& d : sc.defenders) d.alpha = v;
    } else if (k == "eta") {
      for (auto& d : sc.defenders) d.eta = v;
    } else if (k != "total_budget" && k != "budget_split") {
      throw ScenarioError("parameter '" + k + "' does not apply to a scenario file");
    }
  }
  if (auto it = params.find("total_budget"); it != params.end()) {
    const double n = static_cast<double>(sc.defenders.size());
    for (auto& d : sc.defenders) d.budget = total > 0.0 ? d.budget * it->second / total
                                                       : it->second / n;
    total = it->second;
  }
  if (auto it = params.find("budget_split"); it != params.end()) {
    if (sc.defenders.size() != 2) throw ScenarioError("budget_split needs exactly two defenders");
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw ScenarioError("budget split outside [0,1]");
    }
    sc.defenders[0].budget = total * it->second;
    sc.defenders[1].budget = total * (1.0 - it->second);
  }
  return sc;
}

Scenario with_sensitivity_ratio(const Scenario& sc, double ratio) {
  if (!(ratio > 0.0)) throw ScenarioError("sensitivity ratio must be positive");
  auto edges = sc.graph.edges();
  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    edges[e].s = enters_critical(sc.graph, e) ? 1.0 : ratio;
  }
  Scenario out = sc;
  out.graph = AttackGraph(sc.graph.nodes(), std::move(edges), sc.graph.sources(),
                          sc.graph.critical_assets());
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const GameConfig& game_config,
                                const SolverConfig& solver) {
  if (spec.values.empty()) throw ScenarioError("sweep values must be nonempty");
  if (spec.modes.empty()) throw ScenarioError("at least one defense mode is required");
  for (const auto& m : spec.modes) {
    if (!kModes.count(m)) throw ScenarioError("unknown mode '" + m + "'");
  }
  const bool stochastic = spec.sweep == SweepVariable::kSigma;
  if (stochastic) {
    if (spec.replications < 1) throw ScenarioError("replications must be positive");
    for (double v : spec.values) {
      if (!(v >= 0.0)) throw ScenarioError("sigma must be nonnegative");
    }
  }
  const int reps = stochastic ? spec.replications : 1;
  const std::string param = sweep_param(spec.sweep, spec.scenario);
  const std::string var = to_string(spec.sweep);

  std::vector<double> alphas = spec.alphas;
  if (spec.sweep == SweepVariable::kAlpha) alphas.clear();
  if (alphas.empty()) alphas.push_back(std::numeric_limits<double>::quiet_NaN());

  struct Job {
    std::size_t value_index;
    int replication;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    for (int r = 0; r < reps; ++r) jobs.push_back({i, r});
  }
  std::vector<std::vector<ExperimentRow>> out(jobs.size());

  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    const double value = spec.values[job.value_index];
    const std::uint64_t seed = spec.seed + (stochastic ? j : 0);
    for (double alpha : alphas) {
      auto params = spec.fixed;
      if (!param.empty()) params[param] = value;
      if (!std::isnan(alpha)) params["alpha"] = alpha;
      for (const auto& mode : spec.modes) {
        ExperimentRow total;
        total.sweep_var = var;
        total.sweep_value = value;
        total.mode = mode;
        total.defender_id = "TOTAL";
        total.seed = seed;
        try {
          Scenario sc = build_experiment_scenario(spec.scenario, params);
          if (spec.sweep == SweepVariable::kSensitivityRatio) sc = with_sensitivity_ratio(sc, value);
          total.alpha = sc.defenders.empty() ? 1.0 : sc.defenders.front().alpha;
          total.eta = sc.defenders.empty() ? 0.0 : sc.defenders.front().eta;
          double reference = 0.0;
          if (stochastic) {
            reference = play(sc.game(), mode, game_config, solver).result.total_true_loss;
            sc.graph = perturb_baselines(sc.graph, value, seed);
          }
          const Game game = sc.game();
          auto [res, note] = play(game, mode, game_config, solver);
          double perceived = 0.0;
          for (const auto& d : game.defenders()) {
            ExperimentRow row = total;
            row.defender_id = d.id;
            row.alpha = d.alpha;
            row.eta = d.eta;
            row.true_loss = res.true_loss.at(d.id);
            row.perceived_loss = res.perceived_loss.at(d.id);
            row.converged = res.converged;
            perceived += row.perceived_loss;
            out[j].push_back(row);
          }
          total.true_loss = res.total_true_loss;
          total.perceived_loss = perceived;
          total.converged = res.converged;
          total.noncritical_fraction = noncritical_fraction(game.graph(), res.edge_totals);
          if (stochastic) {
            total.relative_difference =
                std::abs(res.total_true_loss - reference) / std::max(reference, 1e-300);
          }
          total.note = note;
        } catch (const std::exception& e) {
          total.converged = false;
          total.true_loss = std::numeric_limits<double>::quiet_NaN();
          total.perceived_loss = std::numeric_limits<double>::quiet_NaN();
          total.note = std::string("error: ") + e.what();
        }
        out[j].push_back(total);
      }
    }
  };

  detail::parallel_for(jobs.size(), run_job);

  ExperimentResult result;
  for (auto& rows : out) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  return result;
}

double mean_relative_difference(const ExperimentResult& result, double sweep_value,
                                const std::string& mode, double alpha) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : result.rows) {
    if (r.defender_id == "TOTAL" && r.sweep_value == sweep_value && r.mode == mode &&
        std::abs(r.alpha - alpha) < 1e-12 && r.note.rfind("error", 0) != 0) {
      sum += r.relative_difference;
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

const ExperimentRow& total_row(const ExperimentResult& result, double sweep_value,
                               const std::string& mode, double alpha) {
  for (const auto& r : result.rows) {
    if (r.defender_id == "TOTAL" && r.sweep_value == sweep_value && r.mode == mode &&
        std::abs(r.alpha - alpha) < 1e-12) {
      return r;
    }
  }
  throw std::out_of_range("no row for the requested sweep point");
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
  out << "sweep_var,sweep_value,mode,alpha,eta,defender_id,true_loss,perceived_loss,"
         "converged,seed,relative_difference,noncritical_fraction,note\n";
  const auto old = out.precision(17);
  for (const auto& r : result.rows) {
    out << r.sweep_var << ',' << r.sweep_value << ',' << r.mode << ',' << r.alpha << ','
        << r.eta << ',' << csv_field(r.defender_id) << ',' << r.true_loss << ','
        << r.perceived_loss << ',' << (r.converged ? "true" : "false") << ',' << r.seed << ','
        << r.relative_difference << ',' << r.noncritical_fraction << ','
        << csv_field(r.note) << '\n';
  }
  out.precision(old);
}

}  // namespace bisg
