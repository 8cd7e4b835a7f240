#include "bisg/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

namespace bisg {

namespace {

constexpr const char* kFigureRead = "read from figure";

void apply_overrides(std::vector<Edge>& edges, std::vector<CriticalAsset>& assets,
                     const std::map<std::string, double>& sensitivity,
                     const std::map<std::string, double>& loss,
                     std::map<std::string, double>& params) {
  for (const auto& [key, s] : sensitivity) {
    auto it = std::find_if(edges.begin(), edges.end(),
                           [&](const Edge& e) { return edge_key(e.from, e.to) == key; });
    if (it == edges.end()) throw ScenarioError("sensitivity override for unknown edge " + key);
    it->s = s;
    params["s:" + key] = s;
  }
  for (const auto& [node, l] : loss) {
    auto it = std::find_if(assets.begin(), assets.end(),
                           [&](const CriticalAsset& a) { return a.node == node; });
    if (it == assets.end()) throw ScenarioError("loss override for non-critical node " + node);
    it->loss = l;
    params["L:" + node] = l;
  }
}

// Splits "s:"/"L:" prefixed parameters back into override maps.
void read_overrides(const std::map<std::string, double>& params,
                    std::map<std::string, double>& sensitivity,
                    std::map<std::string, double>& loss) {
  for (const auto& [k, v] : params) {
    if (k.rfind("s:", 0) == 0) sensitivity[k.substr(2)] = v;
    if (k.rfind("L:", 0) == 0) loss[k.substr(2)] = v;
  }
}

double param(const std::map<std::string, double>& params, const std::string& key,
             double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void check_split(double split) {
  if (!(split >= 0.0 && split <= 1.0)) throw ScenarioError("budget split outside [0,1]");
}

// Positions along one DER chain.
enum Pos { kTop, kA, kB, kC, kD, kE, kGoal, kPosCount };

struct ChainEdge {
  Pos from, to;
  double p0;
  const char* note;
};

constexpr std::array<ChainEdge, 8> kChain = {{
    {kTop, kA, 0.71, "physical access, CVE-2017-10125"},
    {kTop, kB, 0.61, "network access, CVE-2019-2413"},
    {kA, kC, 0.82, "software access, CVE-2018-2791"},
    {kB, kC, 0.82, "software access, CVE-2018-2791"},
    {kC, kD, 0.88, "sending cmd, CVE-2018-1000093"},
    {kD, kE, 0.9, kFigureRead},
    {kE, kGoal, 0.9, kFigureRead},
    {kGoal, kPosCount, 0.9, kFigureRead},  // goal -> shared G
}};

// Criss-cross levels between w nodes, each adding one edge per ordered
// defender pair. The first level joins software access to sending commands.
constexpr std::array<std::pair<Pos, Pos>, 6> kCrossLevels = {{
    {kC, kD}, {kD, kE}, {kA, kC}, {kB, kC}, {kTop, kA}, {kTop, kB}}};

double chain_p0(Pos from, Pos to) {
  for (const auto& ce : kChain) {
    if (ce.from == from && ce.to == to) return ce.p0;
  }
  return 0.9;
}

}  // namespace

Scenario build_der1(const Der1Options& o) {
  if (o.interdependency_links < 0 || o.interdependency_links > 12) {
    throw ScenarioError("interdependency_links must lie in 0..12");
  }
  if (o.n_defenders < 1) throw ScenarioError("n_defenders must be positive");
  check_split(o.budget_split);

  static const std::array<std::array<const char*, kPosCount>, 2> base_names = {{
      {"w9", "w7", "w8", "w6", "w5", "w4", "G0"},
      {"w18", "w16", "w17", "w15", "w14", "w13", "G1"}}};
  const int n = o.n_defenders;
  auto name = [&](int k, Pos p) {
    std::string id = base_names[k % 2][p];
    if (k >= 2) id += "." + std::to_string(k / 2);
    return id;
  };
  auto defender_id = [&](int k) {
    std::string id = k % 2 == 0 ? "PV" : "EV";
    if (k >= 2) id += "." + std::to_string(k / 2);
    return id;
  };

  std::vector<Node> nodes = {{"S", "attacker entry", NodeKind::kSource},
                             {"G", "shared grid asset", NodeKind::kCritical}};
  std::vector<Edge> edges;
  std::vector<std::vector<std::string>> owned(n);
  std::vector<CriticalAsset> assets;
  std::vector<std::string> all_ids;
  for (int k = 0; k < n; ++k) all_ids.push_back(defender_id(k));
  assets.push_back({"G", 1.0, all_ids});

  for (int k = 0; k < n; ++k) {
    for (int p = 0; p < kPosCount; ++p) {
      nodes.push_back({name(k, Pos(p)), "",
                       p == kGoal ? NodeKind::kCritical : NodeKind::kIntermediate});
    }
    assets.push_back({name(k, kGoal), 1.0, {defender_id(k)}});
    edges.push_back({"S", name(k, kTop), 0.9, 1.0, kFigureRead});
    owned[k].push_back(edge_key("S", name(k, kTop)));
    for (const auto& ce : kChain) {
      const std::string to = ce.to == kPosCount ? "G" : name(k, ce.to);
      edges.push_back({name(k, ce.from), to, ce.p0, 1.0, ce.note});
      owned[k].push_back(edge_key(name(k, ce.from), to));
    }
  }

  // Cross edges: level by level, every ordered pair (a, b), a != b. An odd
  // link count adds only the a < b direction of the last level.
  int remaining = o.interdependency_links;
  for (const auto& [from, to] : kCrossLevels) {
    if (remaining <= 0) break;
    const bool partial = remaining == 1;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || (partial && a > b)) continue;
        edges.push_back({name(a, from), name(b, to), chain_p0(from, to), 1.0,
                         "interdependency link"});
        owned[b].push_back(edge_key(name(a, from), name(b, to)));
      }
    }
    remaining -= partial ? 1 : 2;
  }

  Scenario sc;
  sc.name = "der1";
  sc.family = "der1";
  sc.params = {{"interdependency_links", o.interdependency_links},
               {"n_defenders", n},
               {"total_budget", o.total_budget},
               {"budget_split", o.budget_split},
               {"alpha", o.alpha},
               {"eta", o.eta},
               {"per_defender_budget", o.per_defender_budget}};
  apply_overrides(edges, assets, o.sensitivity, o.loss, sc.params);
  sc.graph = AttackGraph(std::move(nodes), std::move(edges), {"S"}, std::move(assets));
  for (int k = 0; k < n; ++k) {
    double budget;
    if (o.per_defender_budget > 0.0) {
      budget = o.per_defender_budget;
    } else if (n == 2) {
      budget = o.total_budget * (k == 0 ? o.budget_split : 1.0 - o.budget_split);
    } else {
      budget = o.total_budget / n;
    }
    sc.defenders.push_back({defender_id(k), owned[k], budget, o.alpha, o.eta});
  }
  return sc;
}

Scenario build_scada(const ScadaOptions& o) {
  if (o.rtus_per_control < 1 || o.rtus_per_control > 64) {
    throw ScenarioError("rtus_per_control must lie in 1..64");
  }
  if (o.interdependency < 0 || o.interdependency > 3) {
    throw ScenarioError("interdependency level must lie in 0..3");
  }
  check_split(o.budget_split);
  const int r = o.rtus_per_control;
  auto rtu = [](int i, int j) { return "RTU" + std::to_string(i) + "_" + std::to_string(j); };

  std::vector<Node> nodes = {{"S", "external attacker", NodeKind::kSource},
                             {"Vendor", "equipment vendor", NodeKind::kIntermediate},
                             {"Corp", "corporate network", NodeKind::kIntermediate}};
  std::vector<Edge> edges = {
      {"S", "Vendor", 0.9, 1.0, "remote authentication, CVE-2010-4732"},
      {"S", "Corp", 0.9, 1.0, kFigureRead}};
  std::vector<CriticalAsset> assets;
  std::array<std::vector<std::string>, 2> owned;
  const std::array<std::string, 2> ids = {"D1", "D2"};

  for (int i = 1; i <= 2; ++i) {
    const std::string dmz = "DMZ" + std::to_string(i);
    const std::string control = "Control" + std::to_string(i);
    const auto& id = ids[i - 1];
    nodes.push_back({dmz, "", NodeKind::kCritical});
    nodes.push_back({control, "", NodeKind::kCritical});
    assets.push_back({dmz, 1.0, {id}});
    assets.push_back({control, 1.0, {id}});
    edges.push_back({"Corp", dmz, 0.75, 1.0, "authentication bypassing, CVE-2019-6519"});
    edges.push_back({dmz, control, 0.75, 1.0, kFigureRead});
    edges.push_back({"Vendor", control, 0.78, 1.0, "control unit, CVE-2018-5313"});
    for (const auto& e : {edge_key("Corp", dmz), edge_key(dmz, control),
                          edge_key("Vendor", control)}) {
      owned[i - 1].push_back(e);
    }
    for (int j = 1; j <= r; ++j) {
      nodes.push_back({rtu(i, j), "", NodeKind::kCritical});
      assets.push_back({rtu(i, j), 1.0, {id}});
      edges.push_back({control, rtu(i, j), 1.0, 1.0, "remote cmd injection, CVE-2011-1566"});
      owned[i - 1].push_back(edge_key(control, rtu(i, j)));
    }
  }

  auto cross = [&](const std::string& from, const std::string& to, double p0, int owner) {
    edges.push_back({from, to, p0, 1.0, "interdependency link"});
    owned[owner].push_back(edge_key(from, to));
  };
  if (o.interdependency >= 1) {
    cross("DMZ1", "Control2", 0.75, 1);
    cross("DMZ2", "Control1", 0.75, 0);
  }
  if (o.interdependency == 2) {
    cross("Control1", rtu(2, 1), 1.0, 1);
    cross("Control2", rtu(1, 1), 1.0, 0);
  }
  if (o.interdependency >= 3) {
    for (int j = 1; j <= r; ++j) {
      cross("Control1", rtu(2, j), 1.0, 1);
      cross("Control2", rtu(1, j), 1.0, 0);
    }
  }

  Scenario sc;
  sc.name = "scada";
  sc.family = "scada";
  sc.params = {{"rtus_per_control", r},
               {"interdependency", o.interdependency},
               {"total_budget", o.total_budget},
               {"budget_split", o.budget_split},
               {"alpha", o.alpha},
               {"eta", o.eta}};
  apply_overrides(edges, assets, o.sensitivity, o.loss, sc.params);
  sc.graph = AttackGraph(std::move(nodes), std::move(edges), {"S"}, std::move(assets));
  sc.defenders.push_back({ids[0], owned[0], o.total_budget * o.budget_split, o.alpha, o.eta});
  sc.defenders.push_back({ids[1], owned[1], o.total_budget * (1.0 - o.budget_split), o.alpha,
                          o.eta});
  return sc;
}

Scenario build_two_path(double budget, double alpha, double eta) {
  Scenario sc;
  sc.name = "fig4a";
  sc.family = "fig4a";
  std::vector<Node> nodes = {{"vs", "source", NodeKind::kSource},
                             {"v1", "", NodeKind::kIntermediate},
                             {"v2", "", NodeKind::kIntermediate},
                             {"v3", "", NodeKind::kIntermediate},
                             {"v4", "", NodeKind::kIntermediate},
                             {"v5", "target", NodeKind::kCritical}};
  std::vector<Edge> edges;
  std::vector<std::string> keys;
  for (const auto& key : kTwoPathEdges) {
    const auto arrow = key.find("->");
    edges.push_back({key.substr(0, arrow), key.substr(arrow + 2), 1.0, 1.0, ""});
    keys.push_back(key);
  }
  sc.graph = AttackGraph(nodes, edges, {"vs"}, {{"v5", 1.0, {"D1"}}});
  sc.defenders.push_back({"D1", keys, budget, alpha, eta});
  return sc;
}

Scenario build_session_network(const std::string& name, double budget, double alpha,
                               double eta) {
  Scenario sc;
  sc.family = "session";
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string target;
  if (name == "A") {
    pairs = {{"v1", "v2"}, {"v1", "v3"}, {"v2", "v4"}, {"v3", "v4"}, {"v4", "v5"}};
    target = "v5";
  } else if (name == "B") {
    pairs = {{"v1", "v2"}, {"v1", "v3"}, {"v2", "v3"}, {"v2", "v4"}, {"v3", "v4"}};
    target = "v4";
  } else {
    throw ScenarioError("unknown network '" + name + "'");
  }
  sc.name = name;
  std::vector<Node> nodes;
  std::set<std::string> ids;
  for (const auto& [a, b] : pairs) ids.insert({a, b});
  for (const auto& id : ids) {
    nodes.push_back({id, "", id == "v1"     ? NodeKind::kSource
                             : id == target ? NodeKind::kCritical
                                            : NodeKind::kIntermediate});
  }
  std::vector<Edge> edges;
  std::vector<std::string> keys;
  for (const auto& [a, b] : pairs) {
    std::string note;
    if (name == "A" && b == target) note = "critical edge";
    if (name == "B" && a == "v2" && b == "v3") note = "cross-over edge";
    edges.push_back({a, b, 1.0, 1.0, note});
    keys.push_back(edge_key(a, b));
  }
  sc.graph = AttackGraph(nodes, edges, {"v1"}, {{target, 1.0, {"subject"}}});
  sc.defenders.push_back({"subject", keys, budget, alpha, eta});
  return sc;
}

Scenario bundled_scenario(const std::string& name) {
  if (name == "der1") return build_der1();
  if (name == "scada") return build_scada();
  if (name == "fig4a") return build_two_path();
  if (name == "fig4b") {
    auto sc = build_session_network("B", 10.0);
    sc.name = "fig4b";
    return sc;
  }
  if (name == "A" || name == "B") return build_session_network(name);
  throw ScenarioError("unknown bundled scenario '" + name + "'");
}

Scenario replicate_scenario(const Scenario& sc, int n, ReplicationMode mode) {
  if (n < 1) throw ScenarioError("replica count must be positive");
  std::map<std::string, double> sens, loss;
  read_overrides(sc.params, sens, loss);
  if (sc.family == "der1" && mode == ReplicationMode::kDefenders) {
    Der1Options o;
    o.interdependency_links = static_cast<int>(param(sc.params, "interdependency_links", 2));
    o.total_budget = param(sc.params, "total_budget", 20.0);
    o.budget_split = param(sc.params, "budget_split", 0.5);
    o.alpha = param(sc.params, "alpha", 1.0);
    o.eta = param(sc.params, "eta", 0.0);
    o.per_defender_budget = param(sc.params, "per_defender_budget", 0.0);
    o.n_defenders = n;
    // Overrides name base-pair edges, which exist for every n >= 2.
    o.sensitivity = sens;
    o.loss = loss;
    return build_der1(o);
  }
  if (sc.family == "scada" && mode == ReplicationMode::kRtus) {
    ScadaOptions o;
    o.interdependency = static_cast<int>(param(sc.params, "interdependency", 0));
    o.total_budget = param(sc.params, "total_budget", 20.0);
    o.budget_split = param(sc.params, "budget_split", 0.5);
    o.alpha = param(sc.params, "alpha", 1.0);
    o.eta = param(sc.params, "eta", 0.0);
    o.rtus_per_control = n;
    o.sensitivity = sens;
    o.loss = loss;
    return build_scada(o);
  }
  throw ScenarioError("replication mode not supported for scenario family '" + sc.family +
                      "'");
}

BaselineAllocation mincut_baseline_allocation(const Game& game) {
  const auto& g = game.graph();
  BaselineAllocation out;
  out.profile = game.zero_profile();
  const auto tree = shortest_path_tree(g, std::vector<double>(g.edge_count(), 1.0), false);
  for (std::size_t k = 0; k < game.size(); ++k) {
    const auto& d = game.defender(k);
    std::vector<NodeIndex> targets;
    for (const auto& a : game.assets(k)) {
      if (std::isfinite(tree.dist[a.node]) && !g.is_source(a.node)) targets.push_back(a.node);
    }
    auto& x = out.profile[d.id];
    out.fallback[d.id] = false;
    if (targets.empty() || x.empty()) continue;

    std::map<EdgeIndex, std::size_t> control_of;
    for (std::size_t c = 0; c < game.controls(k).size(); ++c) {
      for (EdgeIndex e : game.controls(k)[c]) control_of[e] = c;
    }
    // Prefer a cut made only of her own edges. When her assets stay reachable
    // through edges she cannot touch, use her share of the global cut.
    MinCutOptions opts;
    opts.cuttable.assign(g.edge_count(), false);
    for (const auto& [e, c] : control_of) opts.cuttable[e] = true;
    MinCutResult cuts;
    try {
      cuts = min_edge_cut(g, g.source_indices(), targets, opts);
    } catch (const GraphError&) {
      opts.cuttable.clear();
      cuts = min_edge_cut(g, g.source_indices(), targets, opts);
    }
    std::set<std::size_t> chosen;
    for (const EdgeCut& cut : cuts.cuts) {
      for (EdgeIndex e : cut) {
        if (auto it = control_of.find(e); it != control_of.end()) chosen.insert(it->second);
      }
    }
    if (chosen.empty()) {
      // No cut edge is hers: spread over her edges that lie on attack paths.
      out.fallback[d.id] = true;
      for (const auto& [e, c] : control_of) {
        if (std::isfinite(tree.dist[g.edge_from(e)])) chosen.insert(c);
      }
    }
    for (std::size_t c : chosen) x[c] = d.budget / static_cast<double>(chosen.size());
  }
  return out;
}

AttackGraph perturb_baselines(const AttackGraph& graph, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ModelError("sigma must be nonnegative");
  auto edges = graph.edges();
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    for (auto& e : edges) {
      std::normal_distribution<double> draw(e.p0, sigma);
      double q = draw(rng);
      for (int tries = 1; tries < 100 && !(q > 0.0 && q <= 1.0); ++tries) q = draw(rng);
      e.p0 = std::clamp(q, 1e-6, 1.0);
    }
  }
  return AttackGraph(graph.nodes(), std::move(edges), graph.sources(), graph.critical_assets());
}

bool enters_critical(const AttackGraph& graph, EdgeIndex e) {
  const auto& id = graph.nodes()[graph.edge_to(e)].id;
  return std::any_of(graph.critical_assets().begin(), graph.critical_assets().end(),
                     [&](const CriticalAsset& a) { return a.node == id; });
}

}  // namespace bisg
