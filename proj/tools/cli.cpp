#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bisg/experiment.hpp"
#include "bisg/http_api.hpp"
#include "bisg/session.hpp"

namespace bisg::cli {

using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string scenario = "der1";
  std::optional<double> alpha, eta, budget, split;
  std::string mode = "individual";
  std::uint64_t seed = 0;
  std::string out;
};

void add_scenario_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "Bundled name (der1, scada, fig4a, fig4b, A, B) or JSON file");
  cmd->add_option("--alpha", o.alpha, "Behavioral level for every defender")->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--eta", o.eta, "Spreading floor for every defender")->check(CLI::NonNegativeNumber);
  cmd->add_option("--budget", o.budget, "Total budget across defenders")->check(CLI::NonNegativeNumber);
  cmd->add_option("--budget-split", o.split, "Share of the total held by the first defender")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", o.seed, "Seed for every stochastic step");
  cmd->add_option("--out", o.out, "Write the result here instead of standard output");
}

std::map<std::string, double> overrides(const Options& o) {
  std::map<std::string, double> p;
  if (o.alpha) p["alpha"] = *o.alpha;
  if (o.eta) p["eta"] = *o.eta;
  if (o.budget) p["total_budget"] = *o.budget;
  if (o.split) p["budget_split"] = *o.split;
  return p;
}

Scenario resolve(const Options& o) { return build_experiment_scenario(o.scenario, overrides(o)); }

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw ScenarioError("cannot write " + o.out);
  f << text;
}

json investments(const std::vector<std::string>& keys, const std::vector<double>& x) {
  json j = json::object();
  for (std::size_t i = 0; i < keys.size() && i < x.size(); ++i) j[keys[i]] = x[i];
  return j;
}

json equilibrium_json(const Game& game, DefenseMode mode, const EquilibriumResult& r) {
  const Game played = mode == DefenseMode::kIndividual ? game : joint_game(game);
  json defenders = json::array();
  for (const auto& d : played.defenders()) {
    json jd = {{"id", d.id},
               {"alpha", d.alpha},
               {"eta", d.eta},
               {"budget", d.budget},
               {"perceived_loss", r.perceived_loss.at(d.id)},
               {"true_loss", r.true_loss.at(d.id)}};
    if (auto it = r.profile.x.find(d.id); it != r.profile.x.end())
      jd["investments"] = investments(d.edges, it->second);
    defenders.push_back(jd);
  }
  json doc = {{"mode", to_string(mode)},
              {"converged", r.converged},
              {"rounds", r.rounds},
              {"total_true_loss", r.total_true_loss},
              {"defenders", defenders}};
  if (auto it = r.profile.x.find("planner"); it != r.profile.x.end())
    doc["planner"] = investments(played.defender(0).edges, it->second);
  json totals = json::object();
  for (std::size_t e = 0; e < r.edge_totals.size(); ++e)
    totals[game.graph().edge_key(e)] = r.edge_totals[e];
  doc["edge_totals"] = totals;
  return doc;
}

json fit_json(const FitResult& f, std::size_t rounds) {
  return {{"alpha_hat", f.alpha_hat},       {"eta_hat", f.eta_hat},
          {"residual", f.residual},         {"per_round_alpha", f.per_round_alpha},
          {"critical_slope", f.critical_slope}, {"trend", to_string(f.trend)},
          {"rounds", rounds}};
}

// "0.4..1.0" with a step, or a comma list.
std::vector<double> parse_values(const std::string& text, double step) {
  std::vector<double> v;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const double lo = std::stod(text.substr(0, dots));
    const double hi = std::stod(text.substr(dots + 2));
    if (!(step > 0.0) || lo > hi) throw UsageError("bad range '" + text + "'");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) v.push_back(std::round((lo + i * step) * 1e12) / 1e12);
    return v;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.empty()) throw UsageError("no values in '" + text + "'");
  return v;
}

std::vector<RoundRecord> read_rounds(const json& doc) {
  const json* list = &doc;
  if (doc.is_object()) {
    if (doc.contains("rounds") && doc.at("rounds").is_array()) list = &doc.at("rounds");
    else if (doc.contains("history")) list = &doc.at("history");
    else throw ScenarioError("rounds file needs a 'rounds' array");
  }
  std::vector<RoundRecord> rounds;
  for (const auto& r : *list) {
    RoundRecord rec;
    rec.index = r.value("round", static_cast<int>(rounds.size()) + 1);
    rec.allocation = r.at("allocation").get<std::map<std::string, double>>();
    if (r.contains("outcome")) rec.outcome = outcome_from_string(r.at("outcome").get<std::string>());
    if (r.contains("path")) rec.path = r.at("path").get<std::vector<std::string>>();
    rounds.push_back(std::move(rec));
  }
  return rounds;
}

void fail(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioral interdependent security games"};
  app.name("bisg");
  app.require_subcommand(1, 1);

  Options o;

  auto* validate = app.add_subcommand("validate", "Check a scenario and print the report");
  add_scenario_flags(validate, o);

  auto* solve = app.add_subcommand("solve", "One defender's best response");
  add_scenario_flags(solve, o);
  std::string defender, against = "zero";
  solve->add_option("--defender", defender, "Defender id (default: first)");
  solve->add_option("--against", against, "Other defenders' play: zero or uniform")
      ->check(CLI::IsMember({"zero", "uniform"}));

  auto* nash = app.add_subcommand("nash", "Best-response dynamics to an equilibrium");
  add_scenario_flags(nash, o);
  nash->add_option("--mode", o.mode, "individual, joint or central")
      ->check(CLI::IsMember({"individual", "joint", "central"}));
  double tolerance = 1e-6;
  int max_rounds = 500;
  nash->add_option("--tolerance", tolerance, "Sup-norm stopping tolerance")->check(CLI::PositiveNumber);
  nash->add_option("--max-rounds", max_rounds, "Sweep limit")->check(CLI::PositiveNumber);

  auto* experiment = app.add_subcommand("experiment", "Run a sweep from a spec file to CSV");
  std::string spec_path;
  experiment->add_option("--spec", spec_path, "Experiment spec JSON")->required();
  experiment->add_option("--out", o.out, "CSV output path");
  std::optional<std::uint64_t> exp_seed;
  experiment->add_option("--seed", exp_seed, "Override the spec seed");

  auto* transform = app.add_subcommand("transform", "k-hop transform of a scenario");
  add_scenario_flags(transform, o);
  std::vector<std::string> khop, probability;
  transform->add_option("--khop", khop, "node=k, repeatable")->required();
  transform->add_option("--probability", probability, "derived-edge=p override, repeatable");

  auto* fit = app.add_subcommand("fit", "Fit (alpha, eta) from recorded rounds");
  std::string rounds_path, network;
  std::optional<int> unit_budget;
  fit->add_option("--rounds", rounds_path, "Rounds JSON (array, {rounds:[...]} or a session)")
      ->required();
  fit->add_option("--network", network, "Session network A or B (default: from file, else A)");
  fit->add_option("--unit-budget", unit_budget, "Units per round (default: from file, else 24)");
  fit->add_option("--out", o.out, "Write the result here instead of standard output");

  auto* serve = app.add_subcommand("serve", "Serve interactive sessions over HTTP");
  int port = 8080;
  std::string host = "127.0.0.1", log_path;
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--log", log_path, "Append-only session log (JSON lines)");

  auto* compare = app.add_subcommand("compare-baseline", "Equilibrium over min-cut baseline loss across alpha");
  add_scenario_flags(compare, o);
  std::string alphas = "0.4..1.0";
  double step = 0.1;
  compare->add_option("--alphas", alphas, "lo..hi or a comma list");
  compare->add_option("--step", step, "Step for lo..hi ranges")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fail(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (validate->parsed()) {
      const Scenario sc = resolve(o);
      const auto report = validate_graph(sc.graph);
      json violations = report.violations;
      if (report.ok()) {
        try {
          sc.game();
        } catch (const std::exception& e) {
          violations.push_back(e.what());
        }
      }
      const json doc = {{"scenario", sc.name},
                        {"ok", violations.empty()},
                        {"nodes", sc.graph.node_count()},
                        {"edges", sc.graph.edge_count()},
                        {"defenders", sc.defenders.size()},
                        {"violations", violations}};
      emit(o, out, doc.dump(2) + "\n");
      return violations.empty() ? kExitOk : kExitData;
    }

    SolverConfig solver;
    solver.seed = o.seed;

    if (solve->parsed()) {
      const Scenario sc = resolve(o);
      const Game game = sc.game();
      if (game.size() == 0) throw ScenarioError("scenario has no defenders");
      const std::string id = defender.empty() ? game.defender(0).id : defender;
      const auto k = game.defender_index(id);
      auto profile = against == "uniform" ? game.uniform_profile() : game.zero_profile();
      const auto br = best_response(game, profile, id, solver);
      profile[id] = br.x;
      const auto& d = game.defender(k);
      const json doc = {{"defender", id},
                        {"alpha", d.alpha},
                        {"eta", d.eta},
                        {"budget", d.budget},
                        {"against", against},
                        {"perceived_loss", br.perceived_loss},
                        {"true_loss", true_total_loss(game, profile, id)},
                        {"converged", br.converged},
                        {"iterations", br.iterations},
                        {"investments", investments(d.edges, br.x)}};
      emit(o, out, doc.dump(2) + "\n");
      return br.converged ? kExitOk : kExitNoConvergence;
    }

    if (nash->parsed()) {
      const Scenario sc = resolve(o);
      const Game game = sc.game();
      GameConfig cfg;
      cfg.mode = defense_mode_from_string(o.mode);
      cfg.brd_tolerance = tolerance;
      cfg.brd_max_rounds = max_rounds;
      const auto r = best_response_dynamics(game, cfg, solver);
      json doc = equilibrium_json(game, cfg.mode, r);
      doc["scenario"] = sc.name;
      emit(o, out, doc.dump(2) + "\n");
      return r.converged ? kExitOk : kExitNoConvergence;
    }

    if (experiment->parsed()) {
      auto spec = load_experiment_spec(spec_path);
      if (exp_seed) spec.seed = *exp_seed;
      const auto result = run_experiment(spec);
      std::ostringstream csv;
      write_csv(csv, result);
      emit(o, out, csv.str());
      return kExitOk;
    }

    if (transform->parsed()) {
      Scenario sc = resolve(o);
      KHopSpec spec;
      auto split_pair = [](const std::string& s) {
        const auto eq = s.rfind('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + s + "'");
        return std::make_pair(s.substr(0, eq), s.substr(eq + 1));
      };
      for (const auto& item : khop) {
        auto [node, k] = split_pair(item);
        spec.depth[node] = std::stoi(k);
      }
      for (const auto& item : probability) {
        auto [key, p] = split_pair(item);
        spec.probability_override[key] = std::stod(p);
      }
      auto result = khop_transform(sc.graph, spec);
      sc.graph = std::move(result.graph);
      sc.mirror = std::move(result.mirror);
      sc.name += "_khop";
      emit(o, out, scenario_to_json(sc) + "\n");
      return kExitOk;
    }

    if (fit->parsed()) {
      std::ifstream in(rounds_path);
      if (!in) throw ScenarioError("cannot open rounds file " + rounds_path);
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw ScenarioError(std::string("rounds file is not valid JSON: ") + e.what());
      }
      std::string net = network;
      int budget = 24;
      if (doc.is_object()) {
        if (net.empty()) net = doc.value("network", "");
        budget = doc.value("unit_budget", 24);
      }
      if (net.empty()) net = "A";
      if (unit_budget) budget = *unit_budget;
      const auto rounds = read_rounds(doc);
      const auto& graph = session_network(net, budget).graph;
      for (const auto& r : rounds) check_allocation(graph, r.allocation, budget);
      json result = fit_json(fit_alpha_eta(graph, budget, rounds), rounds.size());
      result["network"] = net;
      result["unit_budget"] = budget;
      emit(o, out, result.dump(2) + "\n");
      return kExitOk;
    }

    if (serve->parsed()) {
      SessionStore store(log_path);
      err << "serving sessions on http://" << host << ":" << port << "\n";
      if (!serve_sessions(store, host, port)) throw ScenarioError("cannot listen on " + host + ":" + std::to_string(port));
      return kExitOk;
    }

    if (compare->parsed()) {
      ExperimentSpec spec;
      spec.scenario = o.scenario;
      spec.sweep = SweepVariable::kAlpha;
      spec.values = parse_values(alphas, step);
      spec.fixed = overrides(o);
      spec.fixed.erase("alpha");
      spec.modes = {"individual", "mincut_baseline"};
      spec.seed = o.seed;
      const auto result = run_experiment(spec, {}, solver);
      std::ostringstream table;
      table << "alpha,equilibrium_true_loss,baseline_true_loss,ratio,converged,note\n";
      table << std::setprecision(17);
      auto sorted = spec.values;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      for (double a : sorted) {
        const auto& eq = total_row(result, a, "individual", a);
        const auto& base = total_row(result, a, "mincut_baseline", a);
        std::ostringstream alpha;
        alpha << a;
        table << alpha.str() << ',' << eq.true_loss << ',' << base.true_loss << ','
              << eq.true_loss / std::max(base.true_loss, 1e-300) << ','
              << (eq.converged ? "true" : "false") << ',' << base.note << '\n';
      }
      emit(o, out, table.str());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    fail(err, "usage", e.what());
    return kExitUsage;
  } catch (const SessionError& e) {
    fail(err, e.code(), e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    fail(err, "usage", std::string("bad number: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fail(err, "data", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace bisg::cli
