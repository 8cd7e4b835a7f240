#include "bisg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <unordered_map>

#include "bisg/scenarios.hpp"
#include "parallel.hpp"

namespace bisg {

std::string to_string(Outcome o) {
  return o == Outcome::kCompromised ? "compromised" : "defended";
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::kImproving:
      return "improving";
    case Trend::kWorsening:
      return "worsening";
    case Trend::kStatic:
      break;
  }
  return "static";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "compromised") return Outcome::kCompromised;
  if (s == "defended") return Outcome::kDefended;
  throw ModelError("unknown outcome '" + s + "'");
}

AttackOutcome simulate_attack_outcome(const AttackGraph& graph,
                                      const std::vector<double>& edge_totals,
                                      std::uint64_t seed) {
  if (edge_totals.size() != graph.edge_count())
    throw ModelError("edge investment vector does not match the graph");
  std::vector<double> probs(graph.edge_count());
  for (std::size_t e = 0; e < probs.size(); ++e) {
    const Edge& edge = graph.edges()[e];
    probs[e] = edge_attack_prob(edge.p0, edge.s, edge_totals[e]);
  }

  VulnerablePath worst;
  for (const CriticalAsset& asset : graph.critical_assets()) {
    VulnerablePath vp = most_vulnerable_path(graph, probs, asset.node);
    if (vp.probability > worst.probability) worst = std::move(vp);
  }

  AttackOutcome result;
  if (worst.path.empty() || worst.probability <= 0.0) return result;
  result.probability = worst.probability;
  result.path = graph.path_nodes(worst.path);
  std::mt19937_64 rng(seed);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  result.outcome = u < worst.probability ? Outcome::kCompromised : Outcome::kDefended;
  return result;
}

AttackOutcome simulate_attack_outcome(const Game& game, const InvestmentProfile& profile,
                                      std::uint64_t seed) {
  game.check_feasible(profile);
  return simulate_attack_outcome(game.graph(), game.edge_totals(profile), seed);
}

FitGrid default_fit_grid(double budget, std::size_t edges) {
  FitGrid grid;
  for (int i = 1; i <= 20; ++i) grid.alphas.push_back(i * 0.05);
  const double eta_max = edges == 0 ? 0.0 : std::floor(budget / static_cast<double>(edges));
  const int steps = static_cast<int>(std::lround(eta_max * 10.0));
  for (int i = 0; i <= steps; ++i) grid.etas.push_back(i * 0.1);
  return grid;
}

namespace {

std::string fingerprint(const AttackGraph& graph, double budget, double alpha, double eta) {
  std::ostringstream out;
  out.precision(17);
  for (const Node& n : graph.nodes()) out << n.id << ':' << static_cast<int>(n.kind) << ';';
  for (const Edge& e : graph.edges()) out << e.from << '>' << e.to << ':' << e.p0 << ':' << e.s << ';';
  for (const CriticalAsset& a : graph.critical_assets()) out << a.node << ':' << a.loss << ';';
  out << '|' << budget << '|' << alpha << '|' << eta;
  return out.str();
}

std::mutex cache_mutex;
std::unordered_map<std::string, std::vector<double>> prediction_cache;

// Prediction in graph edge order, scaled so the units sum to the budget.
std::vector<double> predict(const AttackGraph& graph, double budget, double alpha, double eta,
                            const SolverConfig& solver) {
  const std::string key = fingerprint(graph, budget, alpha, eta);
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = prediction_cache.find(key); it != prediction_cache.end()) return it->second;
  }

  Defender subject{"subject", {}, budget, alpha, eta};
  for (std::size_t e = 0; e < graph.edge_count(); ++e) subject.edges.push_back(graph.edge_key(e));
  Game game(graph, {subject});
  const BestResponse br = best_response(game, game.zero_profile(), "subject", solver);

  std::vector<double> units(graph.edge_count(), 0.0);
  const auto& controls = game.controls(0);
  double sum = 0.0;
  for (std::size_t c = 0; c < controls.size(); ++c) {
    units[controls[c].front()] = br.x[c];
    sum += br.x[c];
  }
  if (sum > 0.0)
    for (double& u : units) u *= budget / sum;

  std::lock_guard lock(cache_mutex);
  prediction_cache.emplace(key, units);
  return units;
}

std::vector<double> observed_units(const AttackGraph& graph, const RoundRecord& round) {
  std::vector<double> units(graph.edge_count(), 0.0);
  for (const auto& [key, value] : round.allocation) {
    bool found = false;
    for (std::size_t e = 0; e < graph.edge_count(); ++e) {
      if (graph.edge_key(e) == key) {
        units[e] = value;
        found = true;
        break;
      }
    }
    if (!found) throw ModelError("round " + std::to_string(round.index) + " names unknown edge " + key);
    if (value < 0.0) throw ModelError("round " + std::to_string(round.index) + " has negative units");
  }
  return units;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

struct Cell {
  double alpha;
  double eta;
  std::vector<double> prediction;
};

struct Best {
  double alpha = 1.0;
  double eta = 0.0;
  double residual = std::numeric_limits<double>::infinity();
};

// Cells are visited in descending alpha, then ascending eta, so a strictly
// better residual is required to displace an earlier choice.
Best best_cell(const std::vector<Cell>& cells, const std::vector<std::vector<double>>& obs) {
  Best best;
  for (const Cell& cell : cells) {
    double r = 0.0;
    for (const auto& o : obs) r += squared_distance(cell.prediction, o);
    r /= static_cast<double>(obs.size());
    if (r < best.residual - kFitTieTolerance) best = {cell.alpha, cell.eta, r};
  }
  return best;
}

}  // namespace

std::map<std::string, double> predicted_allocation(const AttackGraph& graph, double budget,
                                                   double alpha, double eta,
                                                   const SolverConfig& solver) {
  const std::vector<double> units = predict(graph, budget, alpha, eta, solver);
  std::map<std::string, double> out;
  for (std::size_t e = 0; e < units.size(); ++e) out[graph.edge_key(e)] = units[e];
  return out;
}

Trend classify_trend(const std::vector<double>& series, double* slope) {
  const std::size_t n = series.size();
  double b = 0.0;
  if (n >= 2) {
    const double mean_t = (static_cast<double>(n) + 1.0) / 2.0;
    double mean_y = 0.0;
    for (double y : series) mean_y += y;
    mean_y /= static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dt = static_cast<double>(i + 1) - mean_t;
      num += dt * (series[i] - mean_y);
      den += dt * dt;
    }
    b = num / den;
  }
  if (slope) *slope = b;
  if (b > kTrendThreshold) return Trend::kImproving;
  if (b < -kTrendThreshold) return Trend::kWorsening;
  return Trend::kStatic;
}

FitResult fit_alpha_eta(const AttackGraph& graph, double budget,
                        const std::vector<RoundRecord>& rounds, const FitGrid& grid,
                        const SolverConfig& solver) {
  if (rounds.empty()) throw ModelError("fit needs at least one round");
  graph.require_valid();
  if (graph.edge_count() == 0) throw ModelError("fit needs a graph with edges");

  std::vector<std::vector<double>> obs;
  for (const RoundRecord& r : rounds) {
    obs.push_back(observed_units(graph, r));
    double sum = 0.0;
    for (double u : obs.back()) sum += u;
    if (std::abs(sum - budget) > 1e-9)
      throw ModelError("round " + std::to_string(r.index) + " does not spend the unit budget");
  }

  FitGrid g = grid;
  const FitGrid defaults = default_fit_grid(budget, graph.edge_count());
  if (g.alphas.empty()) g.alphas = defaults.alphas;
  if (g.etas.empty()) g.etas = defaults.etas;
  std::sort(g.alphas.begin(), g.alphas.end(), std::greater<>());
  std::sort(g.etas.begin(), g.etas.end());

  const double m = static_cast<double>(graph.edge_count());
  std::vector<Cell> cells;
  for (double a : g.alphas)
    for (double e : g.etas)
      if (e * m <= budget + 1e-9) cells.push_back({a, e, {}});
  if (cells.empty()) throw ModelError("no feasible grid cell");

  detail::parallel_for(cells.size(), [&](std::size_t i) {
    cells[i].prediction = predict(graph, budget, cells[i].alpha, cells[i].eta, solver);
  });

  FitResult result;
  const Best overall = best_cell(cells, obs);
  result.alpha_hat = overall.alpha;
  result.eta_hat = overall.eta;
  result.residual = overall.residual;

  std::vector<bool> critical_edge(graph.edge_count(), false);
  for (std::size_t e = 0; e < graph.edge_count(); ++e) critical_edge[e] = enters_critical(graph, e);
  std::vector<double> critical_units;
  for (const auto& o : obs) {
    result.per_round_alpha.push_back(best_cell(cells, {o}).alpha);
    double c = 0.0;
    for (std::size_t e = 0; e < o.size(); ++e)
      if (critical_edge[e]) c += o[e];
    critical_units.push_back(c);
  }
  result.trend = classify_trend(critical_units, &result.critical_slope);
  return result;
}

}  // namespace bisg
