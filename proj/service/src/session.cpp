#include "bisg/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "bisg/scenarios.hpp"

namespace bisg {

using nlohmann::json;

namespace {

constexpr std::uint32_t kRoundStream = 1;
constexpr std::uint32_t kPaidStream = 2;

std::uint64_t derive(std::uint64_t seed, std::uint32_t stream, std::uint32_t value) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, value};
  std::mt19937_64 rng(seq);
  return rng();
}

std::string format_id(std::uint64_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "s" + digits;
}

json round_to_json(const RoundRecord& r) {
  return {{"round", r.index},
          {"allocation", r.allocation},
          {"outcome", to_string(r.outcome)},
          {"path", r.path}};
}

}  // namespace

std::string to_string(SessionStatus s) {
  return s == SessionStatus::kActive ? "active" : "complete";
}

std::uint64_t round_seed(std::uint64_t session_seed, int round) {
  return derive(session_seed, kRoundStream, static_cast<std::uint32_t>(round));
}

int paid_round(std::uint64_t session_seed, int rounds) {
  std::mt19937_64 rng(derive(session_seed, kPaidStream, 0));
  return std::uniform_int_distribution<int>(1, rounds)(rng);
}

const Scenario& session_network(const std::string& name, int unit_budget) {
  static std::mutex mutex;
  static std::map<std::pair<std::string, int>, Scenario> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(name, unit_budget);
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (name != "A" && name != "B")
      throw SessionError("unknown_network", "unknown network '" + name + "'; expected A or B");
    it = cache.emplace(key, build_session_network(name, unit_budget)).first;
  }
  return it->second;
}

void check_allocation(const AttackGraph& graph, const std::map<std::string, double>& units,
                      int unit_budget) {
  double sum = 0.0;
  for (const auto& [key, value] : units) {
    bool known = false;
    for (std::size_t e = 0; e < graph.edge_count() && !known; ++e) known = graph.edge_key(e) == key;
    if (!known) throw SessionError("unknown_edge", "edge " + key + " is not in the network");
    if (!std::isfinite(value) || value != std::floor(value))
      throw SessionError("fractional_units", "units on " + key + " must be an integer");
    if (value < 0.0) throw SessionError("negative_units", "units on " + key + " are negative");
    sum += value;
  }
  if (sum != unit_budget)
    throw SessionError("budget_mismatch", "allocation spends " + std::to_string(static_cast<long long>(sum)) +
                                              " units; the budget is " + std::to_string(unit_budget));
}

AttackOutcome resolve_round(const AttackGraph& graph, const std::map<std::string, double>& units,
                            std::uint64_t session_seed, int round) {
  std::vector<double> totals(graph.edge_count(), 0.0);
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    auto it = units.find(graph.edge_key(e));
    if (it != units.end()) totals[e] = it->second;
  }
  return simulate_attack_outcome(graph, totals, round_seed(session_seed, round));
}

json to_json(const Session& s) {
  json rounds = json::array();
  for (const auto& r : s.rounds) rounds.push_back(round_to_json(r));
  return {{"id", s.id},
          {"network", s.network},
          {"unit_budget", s.unit_budget},
          {"rounds", s.total_rounds},
          {"seed", s.seed},
          {"completed_rounds", s.rounds.size()},
          {"status", to_string(s.status)},
          {"history", rounds}};
}

json to_json(const SessionSummary& s) {
  json outcomes = json::array();
  for (Outcome o : s.outcomes) outcomes.push_back(to_string(o));
  return {{"alpha_hat", s.fit.alpha_hat},
          {"eta_hat", s.fit.eta_hat},
          {"residual", s.fit.residual},
          {"per_round_alpha", s.fit.per_round_alpha},
          {"critical_slope", s.fit.critical_slope},
          {"trend", to_string(s.fit.trend)},
          {"defended_count", s.defended_count},
          {"outcomes", outcomes},
          {"paid_round", s.paid_round},
          {"paid_round_defended", s.paid_round_defended}};
}

json network_description(const std::string& name) {
  const Scenario& sc = session_network(name);
  const AttackGraph& g = sc.graph;
  json nodes = json::array();
  for (const Node& n : g.nodes()) {
    const char* kind = n.kind == NodeKind::kSource     ? "source"
                       : n.kind == NodeKind::kCritical ? "critical"
                                                       : "intermediate";
    nodes.push_back({{"id", n.id}, {"kind", kind}});
  }
  json edges = json::array();
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& edge = g.edges()[e];
    edges.push_back({{"key", g.edge_key(e)},
                     {"from", edge.from},
                     {"to", edge.to},
                     {"p0", edge.p0},
                     {"s", edge.s},
                     {"critical", enters_critical(g, e)},
                     {"cross_over", edge.note == "cross-over edge"},
                     {"note", edge.note}});
  }
  json targets = json::array();
  for (const auto& a : g.critical_assets()) targets.push_back(a.node);
  return {{"name", name}, {"nodes", nodes}, {"edges", edges}, {"sources", g.sources()},
          {"targets", targets}, {"unit_budget", 24}};
}

SessionStore::SessionStore(std::filesystem::path log) : log_(std::move(log)) {
  if (!log_.empty() && std::filesystem::exists(log_)) replay();
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(map_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError("not_found", "no session '" + id + "'");
  return it->second;
}

void SessionStore::append(const json& event) {
  if (log_.empty()) return;
  std::lock_guard lock(log_mutex_);
  std::ofstream out(log_, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw SessionError("storage", "cannot append to " + log_.string());
}

void SessionStore::replay() {
  std::ifstream in(log_);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json ev = json::parse(line, nullptr, false);
    if (ev.is_discarded())
      throw SessionError("storage", log_.string() + ":" + std::to_string(lineno) + ": bad JSON");
    const std::string kind = ev.value("event", "");
    if (kind == "create") {
      auto entry = std::make_shared<Entry>();
      Session& s = entry->session;
      s.id = ev.at("id").get<std::string>();
      s.network = ev.at("network").get<std::string>();
      s.unit_budget = ev.at("unit_budget").get<int>();
      s.total_rounds = ev.at("rounds").get<int>();
      s.seed = ev.at("seed").get<std::uint64_t>();
      sessions_[s.id] = entry;
      if (s.id.size() > 1) next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(s.id.substr(1)) + 1);
    } else if (kind == "round") {
      auto it = sessions_.find(ev.at("id").get<std::string>());
      if (it == sessions_.end())
        throw SessionError("storage", log_.string() + ":" + std::to_string(lineno) + ": unknown session");
      Session& s = it->second->session;
      RoundRecord r;
      r.index = ev.at("round").get<int>();
      if (r.index != static_cast<int>(s.rounds.size()) + 1)
        throw SessionError("storage", log_.string() + ":" + std::to_string(lineno) + ": round out of order");
      r.allocation = ev.at("allocation").get<std::map<std::string, double>>();
      r.outcome = outcome_from_string(ev.at("outcome").get<std::string>());
      r.path = ev.at("path").get<std::vector<std::string>>();
      s.rounds.push_back(std::move(r));
      if (static_cast<int>(s.rounds.size()) == s.total_rounds) s.status = SessionStatus::kComplete;
    } else {
      throw SessionError("storage", log_.string() + ":" + std::to_string(lineno) + ": unknown event");
    }
  }
}

Session SessionStore::create(const std::string& network, int unit_budget, int rounds,
                             std::uint64_t seed) {
  if (unit_budget <= 0) throw SessionError("invalid_parameter", "unit_budget must be positive");
  if (rounds <= 0) throw SessionError("invalid_parameter", "rounds must be positive");
  session_network(network, unit_budget);

  auto entry = std::make_shared<Entry>();
  Session& s = entry->session;
  s.network = network;
  s.unit_budget = unit_budget;
  s.total_rounds = rounds;
  s.seed = seed;
  {
    std::lock_guard lock(map_mutex_);
    s.id = format_id(next_id_++);
    sessions_[s.id] = entry;
  }
  append({{"event", "create"}, {"id", s.id}, {"network", network}, {"unit_budget", unit_budget},
          {"rounds", rounds}, {"seed", seed}});
  return s;
}

RoundResult SessionStore::submit(const std::string& id, int round,
                                 const std::map<std::string, double>& units) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  Session& s = entry->session;
  if (s.status == SessionStatus::kComplete)
    throw SessionError("session_complete", "session " + id + " has no rounds left");
  const int expected = static_cast<int>(s.rounds.size()) + 1;
  if (round != expected)
    throw SessionError("out_of_order", "round " + std::to_string(round) + " submitted; expected round " +
                                           std::to_string(expected));
  const AttackGraph& graph = session_network(s.network, s.unit_budget).graph;
  check_allocation(graph, units, s.unit_budget);

  RoundResult result;
  result.outcome = resolve_round(graph, units, s.seed, round);
  RoundRecord r{round, units, result.outcome.outcome, result.outcome.path};
  append({{"event", "round"}, {"id", id}, {"round", round}, {"allocation", units},
          {"outcome", to_string(r.outcome)}, {"path", r.path}});
  s.rounds.push_back(std::move(r));
  if (static_cast<int>(s.rounds.size()) == s.total_rounds) s.status = SessionStatus::kComplete;
  result.session = s;
  return result;
}

SessionSummary SessionStore::summary(const std::string& id) {
  Session s = get(id);
  if (s.status != SessionStatus::kComplete)
    throw SessionError("session_incomplete", "session " + id + " has " +
                                                 std::to_string(s.total_rounds - s.rounds.size()) +
                                                 " rounds left");
  const AttackGraph& graph = session_network(s.network, s.unit_budget).graph;
  SessionSummary out;
  out.fit = fit_alpha_eta(graph, s.unit_budget, s.rounds);
  for (const auto& r : s.rounds) {
    out.outcomes.push_back(r.outcome);
    if (r.outcome == Outcome::kDefended) ++out.defended_count;
  }
  out.paid_round = paid_round(s.seed, s.total_rounds);
  out.paid_round_defended = out.outcomes[out.paid_round - 1] == Outcome::kDefended;
  return out;
}

Session SessionStore::get(const std::string& id) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

}  // namespace bisg
