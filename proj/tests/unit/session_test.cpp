#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include <httplib.h>

#include "bisg/http_api.hpp"
#include "bisg/session.hpp"

using namespace bisg;
using nlohmann::json;

namespace {

const std::map<std::string, double> kCriticalOnly = {
    {"v1->v2", 0}, {"v1->v3", 0}, {"v2->v4", 0}, {"v3->v4", 0}, {"v4->v5", 24}};
const std::map<std::string, double> kNothingOnCritical = {
    {"v1->v2", 6}, {"v1->v3", 6}, {"v2->v4", 6}, {"v3->v4", 6}, {"v4->v5", 0}};

std::string expect_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SessionError& e) {
    return e.code();
  }
  return "";
}

std::filesystem::path temp_log(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST(Session, CreateExamples) {
  SessionStore store;
  const auto s = store.create("A", 24, 10, 7);
  EXPECT_EQ(s.status, SessionStatus::kActive);
  EXPECT_TRUE(s.rounds.empty());
  EXPECT_EQ(s.total_rounds, 10);
  const auto b = store.create("B", 24, 10, 7);
  EXPECT_NE(b.id, s.id);
  EXPECT_EQ(session_network("B").graph.edge_count(), 5u);
  EXPECT_EQ(expect_code([&] { store.create("A", 24, 0, 7); }), "invalid_parameter");
  EXPECT_EQ(expect_code([&] { store.create("A", 0, 10, 7); }), "invalid_parameter");
  EXPECT_EQ(expect_code([&] { store.create("C", 24, 10, 7); }), "unknown_network");
}

TEST(Session, AllocationValidation) {
  SessionStore store;
  const auto id = store.create("A", 24, 3, 1).id;
  auto short_by_one = kCriticalOnly;
  short_by_one["v4->v5"] = 23;
  EXPECT_EQ(expect_code([&] { store.submit(id, 1, short_by_one); }), "budget_mismatch");
  auto fractional = kCriticalOnly;
  fractional["v4->v5"] = 23.5;
  fractional["v1->v2"] = 0.5;
  EXPECT_EQ(expect_code([&] { store.submit(id, 1, fractional); }), "fractional_units");
  auto negative = kCriticalOnly;
  negative["v4->v5"] = 25;
  negative["v1->v2"] = -1;
  EXPECT_EQ(expect_code([&] { store.submit(id, 1, negative); }), "negative_units");
  EXPECT_EQ(expect_code([&] { store.submit(id, 1, {{"v9->v1", 24}}); }), "unknown_edge");
  EXPECT_EQ(expect_code([&] { store.submit("s999999", 1, kCriticalOnly); }), "not_found");
  EXPECT_TRUE(store.get(id).rounds.empty());
}

TEST(Session, RoundsInOrderOnly) {
  SessionStore store;
  const auto id = store.create("A", 24, 2, 5).id;
  EXPECT_EQ(expect_code([&] { store.submit(id, 2, kCriticalOnly); }), "out_of_order");
  const auto r1 = store.submit(id, 1, kCriticalOnly);
  EXPECT_EQ(r1.outcome.outcome, Outcome::kDefended);
  EXPECT_EQ(r1.session.rounds.size(), 1u);
  EXPECT_EQ(expect_code([&] { store.submit(id, 1, kCriticalOnly); }), "out_of_order");
  EXPECT_EQ(expect_code([&] { store.summary(id); }), "session_incomplete");
  const auto r2 = store.submit(id, 2, kCriticalOnly);
  EXPECT_EQ(r2.session.status, SessionStatus::kComplete);
  EXPECT_EQ(expect_code([&] { store.submit(id, 3, kCriticalOnly); }), "session_complete");
}

TEST(Session, FullCriticalDefenseEffectivelyAlwaysHolds) {
  const auto& g = session_network("A").graph;
  for (int round = 1; round <= 200; ++round) {
    EXPECT_EQ(resolve_round(g, kCriticalOnly, 11, round).outcome, Outcome::kDefended);
  }
}

TEST(Session, OutcomesArePureFunctionsOfSeedRoundAllocation) {
  SessionStore a, b;
  const auto ia = a.create("A", 24, 10, 42).id;
  const auto ib = b.create("A", 24, 10, 42).id;
  for (int r = 1; r <= 10; ++r) {
    const auto oa = a.submit(ia, r, kNothingOnCritical).outcome;
    const auto ob = b.submit(ib, r, kNothingOnCritical).outcome;
    EXPECT_EQ(oa.outcome, ob.outcome);
    EXPECT_EQ(oa.path, ob.path);
    EXPECT_EQ(oa.outcome,
              resolve_round(session_network("A").graph, kNothingOnCritical, 42, r).outcome);
  }
  EXPECT_NE(round_seed(42, 1), round_seed(42, 2));
  EXPECT_NE(round_seed(42, 1), round_seed(43, 1));
}

TEST(Session, SummaryOfRationalReplay) {
  SessionStore store;
  const auto id = store.create("A", 24, 10, 3).id;
  for (int r = 1; r <= 10; ++r) store.submit(id, r, kCriticalOnly);
  const auto s = store.summary(id);
  EXPECT_EQ(s.fit.alpha_hat, 1.0);
  EXPECT_EQ(s.fit.eta_hat, 0.0);
  EXPECT_EQ(s.fit.trend, Trend::kStatic);
  EXPECT_EQ(s.defended_count, 10);
  EXPECT_GE(s.paid_round, 1);
  EXPECT_LE(s.paid_round, 10);
  EXPECT_TRUE(s.paid_round_defended);
  EXPECT_EQ(s.paid_round, paid_round(3, 10));
}

TEST(Session, SummaryOfNearUniformSpreadingHitsGridMaximum) {
  SessionStore store;
  const auto id = store.create("A", 24, 2, 3).id;
  const std::map<std::string, double> spread = {
      {"v1->v2", 5}, {"v1->v3", 5}, {"v2->v4", 5}, {"v3->v4", 5}, {"v4->v5", 4}};
  store.submit(id, 1, spread);
  store.submit(id, 2, spread);
  EXPECT_NEAR(store.summary(id).fit.eta_hat, 4.0, 1e-12);
}

TEST(Session, CrossOverIsNeverPredicted) {
  const auto& g = session_network("B").graph;
  for (double a : {0.1, 0.5, 0.9, 1.0}) {
    EXPECT_NEAR(predicted_allocation(g, 24, a, 0.0).at("v2->v3"), 0.0, 1e-6) << a;
  }
}

TEST(Session, LogReplayRestoresState) {
  const auto log = temp_log("bisg_session_log.jsonl");
  std::string id;
  {
    SessionStore store(log);
    id = store.create("A", 24, 3, 9).id;
    store.submit(id, 1, kNothingOnCritical);
    store.submit(id, 2, kCriticalOnly);
    store.create("B", 24, 10, 1);
  }
  SessionStore restored(log);
  EXPECT_EQ(restored.size(), 2u);
  const auto s = restored.get(id);
  ASSERT_EQ(s.rounds.size(), 2u);
  EXPECT_EQ(s.rounds[0].allocation, kNothingOnCritical);
  EXPECT_EQ(expect_code([&] { restored.submit(id, 2, kCriticalOnly); }), "out_of_order");
  restored.submit(id, 3, kCriticalOnly);
  const auto fresh = restored.create("A", 24, 1, 0);
  EXPECT_NE(fresh.id, id);
  std::filesystem::remove(log);
}

TEST(Session, ConcurrentSubmissionsForOneRoundResolveOnce) {
  SessionStore store;
  const auto id = store.create("A", 24, 10, 4).id;
  std::atomic<int> accepted{0}, rejected{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      try {
        store.submit(id, 1, kCriticalOnly);
        ++accepted;
      } catch (const SessionError& e) {
        if (e.code() == "out_of_order") ++rejected;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(accepted.load(), 1);
  EXPECT_EQ(rejected.load(), 7);
  EXPECT_EQ(store.get(id).rounds.size(), 1u);
}

class HttpApi : public ::testing::Test {
 protected:
  void SetUp() override {
    mount_session_api(server_, store_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() { return httplib::Client("127.0.0.1", port_); }

  SessionStore store_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(HttpApi, FullSession) {
  auto cli = client();
  auto res = cli.Post("/sessions", R"({"network":"A","unit_budget":24,"rounds":2,"seed":7})",
                      "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const auto session = json::parse(res->body);
  EXPECT_EQ(session.at("status"), "active");
  EXPECT_EQ(session.at("completed_rounds"), 0);
  const std::string id = session.at("id");

  const json alloc = {{"allocation", kCriticalOnly}};
  res = cli.Post("/sessions/" + id + "/rounds/1", alloc.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto body = json::parse(res->body);
  EXPECT_EQ(body.at("outcome"), "defended");
  EXPECT_EQ(body.at("path"), (std::vector<std::string>{"v1", "v2", "v4", "v5"}));

  res = cli.Get("/sessions/" + id + "/summary");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body).at("code"), "session_incomplete");

  res = cli.Post("/sessions/" + id + "/rounds/1", alloc.dump(), "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body).at("code"), "out_of_order");

  res = cli.Post("/sessions/" + id + "/rounds/2", alloc.dump(), "application/json");
  EXPECT_EQ(res->status, 200);

  res = cli.Get("/sessions/" + id + "/summary");
  ASSERT_EQ(res->status, 200);
  body = json::parse(res->body);
  EXPECT_EQ(body.at("alpha_hat"), 1.0);
  EXPECT_EQ(body.at("eta_hat"), 0.0);
  EXPECT_EQ(body.at("trend"), "static");
  EXPECT_EQ(body.at("defended_count"), 2);
  EXPECT_GE(body.at("paid_round").get<int>(), 1);

  res = cli.Get("/sessions/" + id);
  EXPECT_EQ(json::parse(res->body).at("status"), "complete");
}

TEST_F(HttpApi, ErrorsCarryCodeAndMessage) {
  auto cli = client();
  auto res = cli.Post("/sessions", "not json", "application/json");
  EXPECT_EQ(res->status, 400);
  auto body = json::parse(res->body);
  EXPECT_EQ(body.at("code"), "invalid_json");
  EXPECT_TRUE(body.at("message").is_string());

  res = cli.Post("/sessions", R"({"network":"Z"})", "application/json");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body).at("code"), "unknown_network");

  res = cli.Post("/sessions", R"({"network":"A","rounds":0})", "application/json");
  EXPECT_EQ(json::parse(res->body).at("code"), "invalid_parameter");

  res = cli.Post("/sessions", R"({"network":"A","unit_budget":24.5})", "application/json");
  EXPECT_EQ(json::parse(res->body).at("code"), "invalid_parameter");

  const std::string id = json::parse(cli.Post("/sessions", "{}", "application/json")->body).at("id");
  res = cli.Post("/sessions/" + id + "/rounds/1", R"({"allocation":{"v4->v5":23}})",
                 "application/json");
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body).at("code"), "budget_mismatch");

  res = cli.Post("/sessions/" + id + "/rounds/x", R"({"allocation":{"v4->v5":24}})",
                 "application/json");
  EXPECT_EQ(json::parse(res->body).at("code"), "out_of_order");

  res = cli.Get("/sessions/nope/summary");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body).at("code"), "not_found");

  res = cli.Get("/elsewhere");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body).at("code"), "not_found");
}

TEST_F(HttpApi, NetworkDescriptions) {
  auto cli = client();
  auto res = cli.Get("/networks/B");
  ASSERT_EQ(res->status, 200);
  const auto b = json::parse(res->body);
  EXPECT_EQ(b.at("edges").size(), 5u);
  int cross = 0;
  for (const auto& e : b.at("edges")) cross += e.at("cross_over").get<bool>();
  EXPECT_EQ(cross, 1);
  const auto a = json::parse(cli.Get("/networks/A")->body);
  int critical = 0;
  for (const auto& e : a.at("edges")) critical += e.at("critical").get<bool>();
  EXPECT_EQ(critical, 1);
  EXPECT_EQ(cli.Get("/networks/Q")->status, 404);
}
