#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bisg/attack_graph.hpp"

namespace bisg {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public ModelError {
 public:
  using ModelError::ModelError;
};

struct Defender {
  std::string id;
  std::vector<std::string> edges;  // "from->to" keys the defender controls
  double budget = 0.0;
  double alpha = 1.0;
  double eta = 0.0;
};

// A control is one decision variable of a defender. It usually maps to a
// single graph edge; on k-hop transformed graphs it maps to every derived
// copy of an original edge so that investments stay mirrored.
using Control = std::vector<EdgeIndex>;

// Per-defender investments, aligned with Game::controls(k).
struct InvestmentProfile {
  std::map<std::string, std::vector<double>> x;

  std::vector<double>& operator[](const std::string& id) { return x[id]; }
  const std::vector<double>& at(const std::string& id) const { return x.at(id); }
};

struct AssetWeight {
  NodeIndex node;
  double loss;
};

// A validated graph plus defenders with resolved controls and assets.
class Game {
 public:
  Game(AttackGraph graph, std::vector<Defender> defenders,
       const EdgeMirrorMap& mirror = {});

  const AttackGraph& graph() const { return graph_; }
  const std::vector<Defender>& defenders() const { return defenders_; }
  const EdgeMirrorMap& mirror() const { return mirror_; }
  std::size_t size() const { return defenders_.size(); }

  std::size_t defender_index(const std::string& id) const;  // throws ModelError
  const Defender& defender(std::size_t k) const { return defenders_[k]; }
  const std::vector<Control>& controls(std::size_t k) const { return controls_[k]; }
  const std::vector<AssetWeight>& assets(std::size_t k) const { return assets_[k]; }

  // All-zero profile.
  InvestmentProfile zero_profile() const;
  // Uniform split of each budget across the defender's controls.
  InvestmentProfile uniform_profile() const;

  // Total investment per graph edge, summed over defenders.
  std::vector<double> edge_totals(const InvestmentProfile& profile) const;
  // Same, leaving defender k out.
  std::vector<double> edge_totals_without(const InvestmentProfile& profile,
                                          std::size_t k) const;

  // Throws InfeasibleError when any defender's investments violate
  // x >= eta - tol or sum(x) <= B + tol, ModelError on shape mismatch.
  void check_feasible(const InvestmentProfile& profile, double tol = 1e-9) const;

 private:
  AttackGraph graph_;
  std::vector<Defender> defenders_;
  EdgeMirrorMap mirror_;
  std::vector<std::vector<Control>> controls_;
  std::vector<std::vector<AssetWeight>> assets_;
};

double prelec_weight(double p, double alpha);
double edge_attack_prob(double p0, double s, double total_x);

// Per-edge length (a_e + s_e*X_e)^alpha with a_e = -ln p0; the weighted
// probability of a path is exp(-sum of lengths).
std::vector<double> perceived_lengths(const AttackGraph& graph,
                                      std::span<const double> totals, double alpha);

// sum_m L_m * exp(-dist_m) for the given edge lengths.
double weighted_loss(const AttackGraph& graph, std::span<const double> lengths,
                     std::span<const AssetWeight> assets);

double true_total_loss(const Game& game, const InvestmentProfile& profile,
                       const std::string& defender);
double perceived_total_loss(const Game& game, const InvestmentProfile& profile,
                            const std::string& defender);
// Sum of true losses over all defenders.
double total_true_loss(const Game& game, const InvestmentProfile& profile);

inline constexpr double kSubgradientCap = 1e6;

// Gradient of the perceived loss with respect to the defender's controls,
// taken through the lexicographically first argmax path of each asset.
// Components whose marginal is unbounded (zero exponent base with alpha < 1)
// are capped at `cap` in magnitude.
std::vector<double> perceived_loss_subgradient(const Game& game,
                                               const InvestmentProfile& profile,
                                               const std::string& defender,
                                               double cap = kSubgradientCap);

}  // namespace bisg
