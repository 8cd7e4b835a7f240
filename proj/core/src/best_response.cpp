#include "bisg/best_response.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace bisg {

AllocationProblem make_problem(const Game& game, const InvestmentProfile& profile,
                               std::size_t k) {
  AllocationProblem p;
  p.graph = &game.graph();
  p.base_totals = game.edge_totals_without(profile, k);
  p.controls = game.controls(k);
  p.assets = game.assets(k);
  const auto& d = game.defender(k);
  p.alpha = d.alpha;
  p.budget = d.budget;
  p.eta = d.eta;
  return p;
}

namespace {

std::vector<double> edge_totals_for(const AllocationProblem& p, std::span<const double> y) {
  if (y.size() != p.controls.size()) throw ModelError("allocation has wrong length");
  std::vector<double> totals = p.base_totals;
  for (std::size_t c = 0; c < y.size(); ++c) {
    for (EdgeIndex e : p.controls[c]) totals[e] += y[c];
  }
  return totals;
}

// Unit-norm descent direction from the argmax paths; zero when nothing moves
// the objective.
std::vector<double> problem_subgradient(const AllocationProblem& p,
                                        std::span<const double> y) {
  const auto& g = *p.graph;
  const auto totals = edge_totals_for(p, y);
  const auto lengths = perceived_lengths(g, totals, p.alpha);
  const auto tree = shortest_path_tree(g, lengths, true);
  std::vector<double> edge_grad(g.edge_count(), 0.0);
  for (const auto& a : p.assets) {
    if (!std::isfinite(tree.dist[a.node])) continue;
    const double value = a.loss * std::exp(-tree.dist[a.node]);
    for (EdgeIndex e : tree.path_to(a.node)) {
      const double s = g.edges()[e].s;
      const double u = g.base_log_odds(e) + s * totals[e];
      const double d = p.alpha == 1.0 ? s
                       : u <= 0.0     ? kSubgradientCap
                                      : std::min(kSubgradientCap,
                                                 p.alpha * s * std::pow(u, p.alpha - 1.0));
      edge_grad[e] -= std::min(kSubgradientCap, value * d);
    }
  }
  std::vector<double> grad(p.controls.size(), 0.0);
  for (std::size_t c = 0; c < grad.size(); ++c) {
    for (EdgeIndex e : p.controls[c]) grad[c] += edge_grad[e];
  }
  return grad;
}

}  // namespace

double allocation_objective(const AllocationProblem& p, std::span<const double> y) {
  const auto totals = edge_totals_for(p, y);
  const auto lengths = perceived_lengths(*p.graph, totals, p.alpha);
  return weighted_loss(*p.graph, lengths, p.assets);
}

std::vector<double> project_feasible(std::span<const double> x, double budget,
                                     double eta) {
  const auto n = x.size();
  const double mass = budget - eta * static_cast<double>(n);
  if (mass < -1e-12) throw InfeasibleError("budget below eta * |E_k|");
  std::vector<double> z(n);
  if (mass <= 0.0) {
    std::fill(z.begin(), z.end(), eta);
    return z;
  }
  double clipped_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = std::max(0.0, x[i] - eta);
    clipped_sum += z[i];
  }
  if (clipped_sum > mass) {
    // Projection onto the simplex {z >= 0, sum z = mass} by sorting.
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = x[i] - eta;
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cumulative += sorted[i];
      const double candidate = (cumulative - mass) / static_cast<double>(i + 1);
      if (i + 1 == n || sorted[i + 1] <= candidate) {
        theta = candidate;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = std::max(0.0, v[i] - theta);
  }
  for (auto& zi : z) zi += eta;
  return z;
}

namespace {

// Log-barrier method on the epigraph form
//   minimize   log sum_m L_m exp(-t_m)
//   subject to t_m <= h_P(y) for paths P to asset m, y >= eta, sum y <= B
// where h_P is the perceived path length. Path constraints are generated
// lazily: after each centering the shortest perceived path of every asset is
// checked and added when it undercuts t_m.
class BarrierSolver {
 public:
  BarrierSolver(const AllocationProblem& p, const SolverConfig& cfg)
      : p_(p), g_(*p.graph), cfg_(cfg) {
    control_of_.assign(g_.edge_count(), kNoIndex);
    for (std::size_t c = 0; c < p.controls.size(); ++c) {
      for (EdgeIndex e : p.controls[c]) control_of_[e] = c;
    }
  }

  BestResponse run() {
    const std::size_t n = p_.controls.size();
    BestResponse out;
    const double mass = p_.budget - p_.eta * static_cast<double>(n);
    if (mass < -1e-12) throw InfeasibleError("budget below eta * |E_k|");
    if (n == 0) return finish(out, {});
    if (mass <= 0.0) return finish(out, std::vector<double>(n, p_.eta));

    w_.assign(n, mass / static_cast<double>(n + 1));
    r_ = mass / static_cast<double>(n + 1);

    // Only assets with positive loss that some source reaches matter.
    const auto tree = current_tree();
    for (const auto& a : p_.assets) {
      if (a.loss > 0.0 && std::isfinite(tree.dist[a.node])) assets_.push_back(a);
    }
    if (assets_.empty()) {
      std::vector<double> y(n, p_.eta + mass / static_cast<double>(n));
      return finish(out, y);
    }
    paths_.resize(assets_.size());
    t_.resize(assets_.size());
    for (std::size_t m = 0; m < assets_.size(); ++m) {
      t_[m] = tree.dist[assets_[m].node] - 1.0;
      add_path(m, tree.path_to(assets_[m].node));
    }

    tau_ = 1.0;
    bool ok = true;
    while (true) {
      for (int rounds = 0;; ++rounds) {
        ok = center(out.iterations) && ok;
        if (!add_violations() || rounds > 200) break;
      }
      const double terms = static_cast<double>(cons_.size() + n + 1);
      if (terms / tau_ <= cfg_.barrier_gap) break;
      tau_ *= cfg_.barrier_growth;
    }
    out.converged = ok;
    return finish(out, current_y());
  }

 private:
  struct PathConstraint {
    std::size_t asset;
    std::vector<EdgeIndex> edges;  // controlled edges only
    double slack;                  // h_P(y) - t_m
  };

  std::vector<double> current_y() const {
    std::vector<double> y(w_.size());
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = p_.eta + w_[c];
    return y;
  }

  double u_of(EdgeIndex e, const std::vector<double>& y) const {
    double total = p_.base_totals[e];
    if (control_of_[e] != kNoIndex) total += y[control_of_[e]];
    return g_.base_log_odds(e) + g_.edges()[e].s * total;
  }

  double ell(double u) const { return p_.alpha == 1.0 ? u : std::pow(u, p_.alpha); }

  // ell(u + d) - ell(u) without cancellation.
  double ell_delta(double u, double d) const {
    if (p_.alpha == 1.0) return d;
    if (u <= 0.0) return std::pow(d, p_.alpha);
    return std::pow(u, p_.alpha) * std::expm1(p_.alpha * std::log1p(d / u));
  }

  PathTree current_tree() const {
    const auto y = current_y();
    std::vector<double> lengths(g_.edge_count());
    for (EdgeIndex e = 0; e < lengths.size(); ++e) lengths[e] = ell(std::max(0.0, u_of(e, y)));
    return shortest_path_tree(g_, lengths, true);
  }

  double path_length(const EdgePath& path, const std::vector<double>& y) const {
    double h = 0.0;
    for (EdgeIndex e : path) h += ell(std::max(0.0, u_of(e, y)));
    return h;
  }

  bool add_path(std::size_t m, const EdgePath& path) {
    if (!seen_.insert({m, path}).second) return false;
    PathConstraint pc;
    pc.asset = m;
    for (EdgeIndex e : path) {
      if (control_of_[e] != kNoIndex) pc.edges.push_back(e);
    }
    pc.slack = path_length(path, current_y()) - t_[m];
    paths_[m].push_back(cons_.size());
    cons_.push_back(std::move(pc));
    return true;
  }

  // Adds the shortest path of every asset whose distance undercuts t_m.
  bool add_violations() {
    const auto tree = current_tree();
    bool added = false;
    const double step = std::min(0.5, std::max(1e-9, 1.0 / tau_));
    for (std::size_t m = 0; m < assets_.size(); ++m) {
      const double dist = tree.dist[assets_[m].node];
      if (dist > t_[m]) continue;
      const double target = dist - step;
      const double lowered = t_[m] - target;
      t_[m] = target;
      for (std::size_t i : paths_[m]) cons_[i].slack += lowered;
      added = add_path(m, tree.path_to(assets_[m].node)) || added;
    }
    return added;
  }

  // Newton centering at the current tau. Returns false on stall.
  bool center(int& iterations) {
    const std::size_t n = w_.size();
    const std::size_t M = t_.size();
    const std::size_t dim = n + M;
    for (int it = 0; it < cfg_.max_newton_steps; ++it) {
      ++iterations;
      const auto y = current_y();
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                                   static_cast<Eigen::Index>(dim));

      // Objective tau * log sum L_m exp(-t_m).
      std::vector<double> pi(M);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < M; ++m) {
        top = std::max(top, std::log(assets_[m].loss) - t_[m]);
      }
      double z = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        pi[m] = std::exp(std::log(assets_[m].loss) - t_[m] - top);
        z += pi[m];
      }
      for (auto& v : pi) v /= z;
      for (std::size_t m = 0; m < M; ++m) {
        const auto im = static_cast<Eigen::Index>(n + m);
        grad(im) -= tau_ * pi[m];
        hess(im, im) += tau_ * pi[m];
        for (std::size_t q = 0; q < M; ++q) {
          hess(im, static_cast<Eigen::Index>(n + q)) -= tau_ * pi[m] * pi[q];
        }
      }

      // Bounds w > 0 and budget slack r > 0.
      for (std::size_t c = 0; c < n; ++c) {
        const auto ic = static_cast<Eigen::Index>(c);
        grad(ic) += -1.0 / w_[c] + 1.0 / r_;
        hess(ic, ic) += 1.0 / (w_[c] * w_[c]);
      }
      hess.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))
          .array() += 1.0 / (r_ * r_);

      // Path constraints.
      std::vector<std::pair<Eigen::Index, double>> dg;
      for (const auto& pc : cons_) {
        dg.clear();
        std::map<std::size_t, std::pair<double, double>> per_control;
        for (EdgeIndex e : pc.edges) {
          const double s = g_.edges()[e].s;
          const double u = u_of(e, y);
          double d1 = s, d2 = 0.0;
          if (p_.alpha != 1.0) {
            d1 = p_.alpha * s * std::pow(u, p_.alpha - 1.0);
            d2 = p_.alpha * (p_.alpha - 1.0) * s * s * std::pow(u, p_.alpha - 2.0);
          }
          auto& acc = per_control[control_of_[e]];
          acc.first += d1;
          acc.second += d2;
        }
        const double inv = 1.0 / pc.slack;
        for (const auto& [c, d] : per_control) {
          const auto ic = static_cast<Eigen::Index>(c);
          dg.emplace_back(ic, d.first);
          hess(ic, ic) -= d.second * inv;
        }
        dg.emplace_back(static_cast<Eigen::Index>(n + pc.asset), -1.0);
        for (const auto& [i, gi] : dg) {
          grad(i) -= gi * inv;
          for (const auto& [j, gj] : dg) hess(i, j) += gi * gj * inv * inv;
        }
      }

      Eigen::VectorXd step;
      if (!newton_direction(hess, grad, step)) return false;
      const double decrement = -grad.dot(step);
      if (!(decrement >= 0.0)) return false;
      if (decrement / 2.0 <= 1e-10) return true;

      if (!line_search(step, decrement, y)) return decrement / 2.0 <= 1e-6;
    }
    return false;
  }

  // Solves hess * step = -grad after symmetric Jacobi scaling; the barrier
  // makes the diagonal span many orders of magnitude near the boundary.
  static bool newton_direction(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad,
                               Eigen::VectorXd& step) {
    const Eigen::VectorXd d = hess.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd scaled = d.asDiagonal() * hess * d.asDiagonal();
    const Eigen::VectorXd rhs = -(d.asDiagonal() * grad);
    for (double reg = 0.0; reg <= 1e-6; reg = reg == 0.0 ? 1e-14 : reg * 100.0) {
      if (reg > 0.0) scaled.diagonal().array() += reg;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
      if (ldlt.info() != Eigen::Success) continue;
      step = d.asDiagonal() * ldlt.solve(rhs);
      if (step.allFinite()) return true;
    }
    return false;
  }

  bool line_search(const Eigen::VectorXd& step, double decrement,
                   const std::vector<double>& y) {
    const std::size_t n = w_.size();
    const std::size_t M = t_.size();
    double sum_dw = 0.0;
    double limit = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double dw = step(static_cast<Eigen::Index>(c));
      sum_dw += dw;
      if (dw < 0.0) limit = std::min(limit, -0.99 * w_[c] / dw);
    }
    if (sum_dw > 0.0) limit = std::min(limit, 0.99 * r_ / sum_dw);

    std::vector<double> pi(M);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) top = std::max(top, std::log(assets_[m].loss) - t_[m]);
    double z = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      pi[m] = std::exp(std::log(assets_[m].loss) - t_[m] - top);
      z += pi[m];
    }
    for (auto& v : pi) v /= z;

    std::vector<double> new_slack(cons_.size());
    for (double a = limit; a > 1e-20; a *= 0.5) {
      bool feasible = true;
      double dphi = 0.0;
      for (std::size_t i = 0; i < cons_.size() && feasible; ++i) {
        const auto& pc = cons_[i];
        double dh = 0.0;
        for (EdgeIndex e : pc.edges) {
          const double d = g_.edges()[e].s * a *
                           step(static_cast<Eigen::Index>(control_of_[e]));
          dh += ell_delta(u_of(e, y), d);
        }
        const double change = dh - a * step(static_cast<Eigen::Index>(n + pc.asset));
        new_slack[i] = pc.slack + change;
        if (!(new_slack[i] > 0.0)) feasible = false;
        else dphi -= std::log1p(change / pc.slack);
      }
      if (!feasible) continue;
      double mix = 0.0;
      for (std::size_t m = 0; m < M; ++m) {
        mix += pi[m] * std::expm1(-a * step(static_cast<Eigen::Index>(n + m)));
      }
      dphi += tau_ * std::log1p(mix);
      for (std::size_t c = 0; c < n; ++c) {
        dphi -= std::log1p(a * step(static_cast<Eigen::Index>(c)) / w_[c]);
      }
      dphi -= std::log1p(-a * sum_dw / r_);
      if (dphi <= -0.01 * a * decrement) {
        for (std::size_t c = 0; c < n; ++c) w_[c] += a * step(static_cast<Eigen::Index>(c));
        for (std::size_t m = 0; m < M; ++m) t_[m] += a * step(static_cast<Eigen::Index>(n + m));
        r_ -= a * sum_dw;
        for (std::size_t i = 0; i < cons_.size(); ++i) cons_[i].slack = new_slack[i];
        return true;
      }
    }
    return false;
  }

  BestResponse finish(BestResponse& out, std::vector<double> y) const {
    out.perceived_loss = allocation_objective(p_, y);
    out.x = std::move(y);
    return out;
  }

  const AllocationProblem& p_;
  const AttackGraph& g_;
  const SolverConfig& cfg_;
  std::vector<std::size_t> control_of_;
  std::vector<AssetWeight> assets_;
  std::vector<double> w_;
  double r_ = 0.0;
  std::vector<double> t_;
  std::vector<PathConstraint> cons_;
  std::vector<std::vector<std::size_t>> paths_;
  std::set<std::pair<std::size_t, EdgePath>> seen_;
  double tau_ = 1.0;
};

BestResponse solve_subgradient(const AllocationProblem& p, const SolverConfig& cfg) {
  const std::size_t n = p.controls.size();
  BestResponse out;
  const double mass = p.budget - p.eta * static_cast<double>(n);
  if (mass < -1e-12) throw InfeasibleError("budget below eta * |E_k|");
  if (n == 0 || mass <= 0.0) {
    out.x.assign(n, p.eta);
    out.perceived_loss = allocation_objective(p, out.x);
    return out;
  }

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, p.eta + mass / static_cast<double>(n));
  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> y(n);
    double sum = 0.0;
    for (auto& v : y) sum += (v = expo(rng));
    for (auto& v : y) v = p.eta + mass * v / sum;
    starts.push_back(std::move(y));
  }

  out.perceived_loss = std::numeric_limits<double>::infinity();
  const int window_start =
      std::max(1, static_cast<int>(cfg.max_iters * (1.0 - cfg.averaging_fraction)));
  bool settled = true;
  for (const auto& start : starts) {
    std::vector<double> y = start;
    std::vector<double> avg(n, 0.0);
    int averaged = 0;
    double window_lo = std::numeric_limits<double>::infinity();
    double window_hi = -window_lo;
    auto consider = [&](const std::vector<double>& cand) {
      const double f = allocation_objective(p, cand);
      if (f < out.perceived_loss) {
        out.perceived_loss = f;
        out.x = cand;
      }
      return f;
    };
    consider(y);
    for (int t = 1; t <= cfg.max_iters; ++t) {
      ++out.iterations;
      auto grad = problem_subgradient(p, y);
      double norm = 0.0;
      for (double gi : grad) norm += gi * gi;
      norm = std::sqrt(norm);
      if (norm == 0.0) break;
      const double step = cfg.step_c * p.budget / std::sqrt(static_cast<double>(t));
      for (std::size_t c = 0; c < n; ++c) y[c] -= step * grad[c] / norm;
      y = project_feasible(y, p.budget, p.eta);
      const double f = consider(y);
      if (t >= window_start) {
        for (std::size_t c = 0; c < n; ++c) avg[c] += y[c];
        ++averaged;
        window_lo = std::min(window_lo, f);
        window_hi = std::max(window_hi, f);
      }
    }
    if (averaged > 0) {
      for (auto& v : avg) v /= averaged;
      consider(project_feasible(avg, p.budget, p.eta));
      if (window_hi - window_lo > cfg.tolerance) settled = false;
    }
  }
  out.converged = settled;
  return out;
}

}  // namespace

BestResponse solve_allocation(const AllocationProblem& problem, const SolverConfig& config) {
  if (problem.graph == nullptr) throw ModelError("allocation problem without graph");
  if (!(problem.alpha > 0.0 && problem.alpha <= 1.0)) {
    throw ModelError("alpha must lie in (0,1]");
  }
  if (config.method == SolverMethod::kSubgradient) return solve_subgradient(problem, config);
  BarrierSolver solver(problem, config);
  return solver.run();
}

BestResponse best_response(const Game& game, const InvestmentProfile& profile,
                           const std::string& defender, const SolverConfig& config) {
  const auto k = game.defender_index(defender);
  return solve_allocation(make_problem(game, profile, k), config);
}

std::vector<double> closed_form_two_path(double alpha, double budget,
                                         const std::map<std::string, double>& sens) {
  if (sens.size() != kTwoPathEdges.size()) {
    throw ModelError("unsupported topology: expected the six two-path edges");
  }
  std::array<double, 6> s{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto it = sens.find(kTwoPathEdges[i]);
    if (it == sens.end()) throw ModelError("unsupported topology: missing " + kTwoPathEdges[i]);
    if (!(it->second >= 1.0)) throw ModelError("sensitivity below 1");
    s[i] = it->second;
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ModelError("alpha must lie in (0,1]");
  if (!(budget >= 0.0)) throw ModelError("negative budget");
  std::vector<double> x(6, 0.0);
  if (budget == 0.0) return x;
  // Indices: shared {0, 5}; upper path private {1, 3}; lower path private {2, 4}.
  constexpr std::array<std::size_t, 2> shared = {0, 5}, upper = {1, 3}, lower = {2, 4};

  if (alpha == 1.0) {
    // Linear case: a dollar on a shared edge buys s of length on both paths;
    // on a private pair (a, b) it buys s_a*s_b/(s_a+s_b) on both.
    const double best_shared = std::max(s[0], s[5]);
    const double su = std::max(s[1], s[3]), sl = std::max(s[2], s[4]);
    const double pair_rate = su * sl / (su + sl);
    if (best_shared >= pair_rate) {
      std::vector<std::size_t> tied;
      for (auto i : shared) {
        if (s[i] == best_shared) tied.push_back(i);
      }
      for (auto i : tied) x[i] = budget / static_cast<double>(tied.size());
      return x;
    }
    auto spread = [&](const std::array<std::size_t, 2>& side, double smax, double amount) {
      std::vector<std::size_t> tied;
      for (auto i : side) {
        if (s[i] == smax) tied.push_back(i);
      }
      for (auto i : tied) x[i] = amount / static_cast<double>(tied.size());
    };
    spread(upper, su, budget * sl / (su + sl));
    spread(lower, sl, budget * su / (su + sl));
    return x;
  }

  // Stationarity with path weights theta and 1 - theta: an edge with total
  // weight c has x = (c * s^alpha)^(1/(1-alpha)) up to a common scale.
  const double q = 1.0 / (1.0 - alpha);
  auto raw = [&](std::size_t i, double weight) {
    return std::pow(weight * std::pow(s[i], alpha), q);
  };
  auto length = [&](std::size_t i, double xi) { return std::pow(s[i] * xi, alpha); };
  auto imbalance = [&](double theta) {
    double up = 0.0, down = 0.0;
    for (auto i : upper) up += length(i, raw(i, theta));
    for (auto i : lower) down += length(i, raw(i, 1.0 - theta));
    return up - down;  // increasing in theta
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (imbalance(mid) < 0.0 ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  double total = 0.0;
  for (auto i : shared) total += (x[i] = raw(i, 1.0));
  for (auto i : upper) total += (x[i] = raw(i, theta));
  for (auto i : lower) total += (x[i] = raw(i, 1.0 - theta));
  for (auto& v : x) v *= budget / total;
  return x;
}

}  // namespace bisg
