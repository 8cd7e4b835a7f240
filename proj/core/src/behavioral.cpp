#include "bisg/behavioral.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace bisg {

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ModelError("alpha must lie in (0,1]");
  }
}

}  // namespace

Game::Game(AttackGraph graph, std::vector<Defender> defenders,
           const EdgeMirrorMap& mirror)
    : graph_(std::move(graph)), defenders_(std::move(defenders)), mirror_(mirror) {
  graph_.require_valid();
  std::set<std::string> ids;
  for (const auto& d : defenders_) {
    if (d.id.empty()) throw ModelError("defender with empty id");
    if (!ids.insert(d.id).second) throw ModelError("duplicate defender '" + d.id + "'");
    require_alpha(d.alpha);
    if (!(d.budget >= 0.0) || !std::isfinite(d.budget)) {
      throw ModelError("defender '" + d.id + "' has invalid budget");
    }
    if (!(d.eta >= 0.0) || !std::isfinite(d.eta)) {
      throw ModelError("defender '" + d.id + "' has invalid eta");
    }
    std::vector<Control> controls;
    std::set<EdgeIndex> used;
    for (const auto& key : d.edges) {
      Control c;
      if (auto it = mirror.find(key); it != mirror.end()) {
        for (const auto& derived : it->second) c.push_back(graph_.edge_index(derived));
      } else {
        c.push_back(graph_.edge_index(key));
      }
      for (EdgeIndex e : c) {
        if (!used.insert(e).second) {
          throw ModelError("defender '" + d.id + "' lists edge '" + key + "' twice");
        }
      }
      controls.push_back(std::move(c));
    }
    if (d.budget < d.eta * static_cast<double>(controls.size()) - 1e-12) {
      throw InfeasibleError("defender '" + d.id + "': budget below eta * |E_k|");
    }
    controls_.push_back(std::move(controls));
  }

  assets_.resize(defenders_.size());
  for (const auto& a : graph_.critical_assets()) {
    for (const auto& owner : a.owners) {
      // Owners that are not defenders of this game are allowed; the asset
      // then simply has no one to account for it.
      auto it = std::find_if(defenders_.begin(), defenders_.end(),
                             [&](const Defender& d) { return d.id == owner; });
      if (it == defenders_.end()) continue;
      assets_[it - defenders_.begin()].push_back({graph_.node_index(a.node), a.loss});
    }
  }
}

std::size_t Game::defender_index(const std::string& id) const {
  for (std::size_t k = 0; k < defenders_.size(); ++k) {
    if (defenders_[k].id == id) return k;
  }
  throw ModelError("unknown defender '" + id + "'");
}

InvestmentProfile Game::zero_profile() const {
  InvestmentProfile p;
  for (std::size_t k = 0; k < size(); ++k) {
    p[defenders_[k].id].assign(controls_[k].size(), 0.0);
  }
  return p;
}

InvestmentProfile Game::uniform_profile() const {
  InvestmentProfile p;
  for (std::size_t k = 0; k < size(); ++k) {
    const auto n = controls_[k].size();
    p[defenders_[k].id].assign(n, n ? defenders_[k].budget / static_cast<double>(n) : 0.0);
  }
  return p;
}

std::vector<double> Game::edge_totals_without(const InvestmentProfile& profile,
                                              std::size_t skip) const {
  std::vector<double> totals(graph_.edge_count(), 0.0);
  for (std::size_t k = 0; k < size(); ++k) {
    if (k == skip) continue;
    auto it = profile.x.find(defenders_[k].id);
    if (it == profile.x.end()) continue;  // missing defender invests nothing
    const auto& xs = it->second;
    if (xs.size() != controls_[k].size()) {
      throw ModelError("profile for '" + defenders_[k].id + "' has wrong length");
    }
    for (std::size_t c = 0; c < xs.size(); ++c) {
      if (!(xs[c] >= 0.0) || !std::isfinite(xs[c])) {
        throw ModelError("negative or non-finite investment for '" +
                         defenders_[k].id + "'");
      }
      for (EdgeIndex e : controls_[k][c]) totals[e] += xs[c];
    }
  }
  return totals;
}

std::vector<double> Game::edge_totals(const InvestmentProfile& profile) const {
  return edge_totals_without(profile, kNoIndex);
}

void Game::check_feasible(const InvestmentProfile& profile, double tol) const {
  for (std::size_t k = 0; k < size(); ++k) {
    const auto& d = defenders_[k];
    auto it = profile.x.find(d.id);
    if (it == profile.x.end()) throw ModelError("profile lacks defender '" + d.id + "'");
    if (it->second.size() != controls_[k].size()) {
      throw ModelError("profile for '" + d.id + "' has wrong length");
    }
    double sum = 0.0;
    for (double x : it->second) {
      if (!(x >= d.eta - tol)) {
        throw InfeasibleError("investment below floor for '" + d.id + "'");
      }
      sum += x;
    }
    if (sum > d.budget + tol) throw InfeasibleError("budget exceeded for '" + d.id + "'");
  }
}

double prelec_weight(double p, double alpha) {
  require_alpha(alpha);
  if (!(p >= 0.0 && p <= 1.0)) throw ModelError("probability outside [0,1]");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  if (alpha == 1.0) return p;
  return std::exp(-std::pow(-std::log(p), alpha));
}

double edge_attack_prob(double p0, double s, double total_x) {
  if (!(total_x >= 0.0)) throw ModelError("negative investment");
  if (!(p0 > 0.0 && p0 <= 1.0)) throw ModelError("p0 outside (0,1]");
  if (!(s >= 1.0)) throw ModelError("sensitivity below 1");
  return p0 * std::exp(-s * total_x);
}

std::vector<double> perceived_lengths(const AttackGraph& graph,
                                      std::span<const double> totals, double alpha) {
  require_alpha(alpha);
  std::vector<double> lengths(graph.edge_count());
  for (EdgeIndex e = 0; e < lengths.size(); ++e) {
    const double u = graph.base_log_odds(e) + graph.edges()[e].s * totals[e];
    lengths[e] = alpha == 1.0 ? u : std::pow(u, alpha);
  }
  return lengths;
}

double weighted_loss(const AttackGraph& graph, std::span<const double> lengths,
                     std::span<const AssetWeight> assets) {
  if (assets.empty()) return 0.0;
  const auto tree = shortest_path_tree(graph, lengths, false);
  double loss = 0.0;
  for (const auto& a : assets) {
    if (std::isfinite(tree.dist[a.node])) loss += a.loss * std::exp(-tree.dist[a.node]);
  }
  return loss;
}

namespace {

double loss_at_alpha(const Game& game, const InvestmentProfile& profile,
                     const std::string& defender, double alpha) {
  const auto k = game.defender_index(defender);
  const auto totals = game.edge_totals(profile);
  const auto lengths = perceived_lengths(game.graph(), totals, alpha);
  return weighted_loss(game.graph(), lengths, game.assets(k));
}

}  // namespace

double true_total_loss(const Game& game, const InvestmentProfile& profile,
                       const std::string& defender) {
  return loss_at_alpha(game, profile, defender, 1.0);
}

double perceived_total_loss(const Game& game, const InvestmentProfile& profile,
                            const std::string& defender) {
  const auto k = game.defender_index(defender);
  return loss_at_alpha(game, profile, defender, game.defender(k).alpha);
}

double total_true_loss(const Game& game, const InvestmentProfile& profile) {
  const auto totals = game.edge_totals(profile);
  const auto lengths = perceived_lengths(game.graph(), totals, 1.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < game.size(); ++k) {
    sum += weighted_loss(game.graph(), lengths, game.assets(k));
  }
  return sum;
}

std::vector<double> perceived_loss_subgradient(const Game& game,
                                               const InvestmentProfile& profile,
                                               const std::string& defender,
                                               double cap) {
  const auto k = game.defender_index(defender);
  const auto& graph = game.graph();
  const double alpha = game.defender(k).alpha;
  const auto totals = game.edge_totals(profile);
  const auto lengths = perceived_lengths(graph, totals, alpha);
  const auto tree = shortest_path_tree(graph, lengths, true);

  std::vector<double> edge_grad(graph.edge_count(), 0.0);
  for (const auto& a : game.assets(k)) {
    if (!std::isfinite(tree.dist[a.node])) continue;
    const double value = a.loss * std::exp(-tree.dist[a.node]);
    for (EdgeIndex e : tree.path_to(a.node)) {
      const double s = graph.edges()[e].s;
      const double u = graph.base_log_odds(e) + s * totals[e];
      double d;
      if (alpha == 1.0) {
        d = s;
      } else if (u <= 0.0) {
        d = cap;
      } else {
        d = std::min(cap, alpha * s * std::pow(u, alpha - 1.0));
      }
      edge_grad[e] -= std::min(cap, value * d);
    }
  }
  const auto& controls = game.controls(k);
  std::vector<double> grad(controls.size(), 0.0);
  for (std::size_t c = 0; c < controls.size(); ++c) {
    for (EdgeIndex e : controls[c]) grad[c] += edge_grad[e];
  }
  return grad;
}

}  // namespace bisg
