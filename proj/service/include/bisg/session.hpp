#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bisg/estimation.hpp"
#include "bisg/scenario.hpp"

namespace bisg {

// Error with a stable machine-readable code, surfaced as {code, message}.
class SessionError : public std::runtime_error {
 public:
  SessionError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

enum class SessionStatus { kActive, kComplete };
std::string to_string(SessionStatus s);

struct Session {
  std::string id;
  std::string network;  // "A" or "B"
  int unit_budget = 24;
  int total_rounds = 10;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  SessionStatus status = SessionStatus::kActive;
};

struct RoundResult {
  AttackOutcome outcome;
  Session session;
};

struct SessionSummary {
  FitResult fit;
  int defended_count = 0;
  std::vector<Outcome> outcomes;
  int paid_round = 0;  // 1-based
  bool paid_round_defended = false;
};

// Seed used to resolve a round; a pure function of its arguments.
std::uint64_t round_seed(std::uint64_t session_seed, int round);
// Round whose outcome is paid; uniform over 1..rounds.
int paid_round(std::uint64_t session_seed, int rounds);

// Bundled session network at the given unit budget (1 unit = 1 currency).
const Scenario& session_network(const std::string& name, int unit_budget = 24);

// Resolves one round without touching any session state.
AttackOutcome resolve_round(const AttackGraph& graph, const std::map<std::string, double>& units,
                            std::uint64_t session_seed, int round);

// Validates integer units summing to the budget over edges of the network.
void check_allocation(const AttackGraph& graph, const std::map<std::string, double>& units,
                      int unit_budget);

nlohmann::json to_json(const Session& session);
nlohmann::json to_json(const SessionSummary& summary);
nlohmann::json network_description(const std::string& name);

// Thread-safe session registry. With a log path every event is appended as
// one JSON line and an existing log is replayed on construction.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path log = {});

  Session create(const std::string& network, int unit_budget, int rounds, std::uint64_t seed);
  RoundResult submit(const std::string& id, int round, const std::map<std::string, double>& units);
  SessionSummary summary(const std::string& id);
  Session get(const std::string& id);
  std::size_t size() const;

 private:
  struct Entry {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void append(const nlohmann::json& event);
  void replay();

  std::filesystem::path log_;
  mutable std::mutex map_mutex_;
  std::mutex log_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace bisg
