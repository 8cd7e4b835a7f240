#include <benchmark/benchmark.h>

#include "bisg/estimation.hpp"
#include "bisg/scenarios.hpp"

using namespace bisg;

namespace {

void BM_BestResponseDer1(benchmark::State& state) {
  Der1Options o;
  o.alpha = state.range(0) / 10.0;
  const auto game = build_der1(o).game();
  const auto prof = game.uniform_profile();
  for (auto _ : state) benchmark::DoNotOptimize(best_response(game, prof, "PV"));
}
BENCHMARK(BM_BestResponseDer1)->Arg(10)->Arg(6)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BestResponseSubgradient(benchmark::State& state) {
  Der1Options o;
  o.alpha = 0.6;
  const auto game = build_der1(o).game();
  const auto prof = game.uniform_profile();
  SolverConfig cfg;
  cfg.method = SolverMethod::kSubgradient;
  for (auto _ : state) benchmark::DoNotOptimize(best_response(game, prof, "PV", cfg));
}
BENCHMARK(BM_BestResponseSubgradient)->Unit(benchmark::kMillisecond);

void BM_BrdDer1Defenders(benchmark::State& state) {
  Der1Options o;
  o.alpha = 0.6;
  o.n_defenders = static_cast<int>(state.range(0));
  o.per_defender_budget = 10.0;
  const auto game = build_der1(o).game();
  for (auto _ : state) benchmark::DoNotOptimize(best_response_dynamics(game));
}
BENCHMARK(BM_BrdDer1Defenders)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BrdScadaRtus(benchmark::State& state) {
  ScadaOptions o;
  o.alpha = 0.6;
  o.rtus_per_control = static_cast<int>(state.range(0));
  const auto game = build_scada(o).game();
  for (auto _ : state) benchmark::DoNotOptimize(best_response_dynamics(game));
}
BENCHMARK(BM_BrdScadaRtus)->Arg(3)->Arg(9)->Arg(18)->Unit(benchmark::kMillisecond);

void BM_SocialOptimumScada(benchmark::State& state) {
  ScadaOptions o;
  o.alpha = 0.6;
  o.budget_split = 0.2;
  const auto game = build_scada(o).game();
  for (auto _ : state) benchmark::DoNotOptimize(social_optimum(game, 0.6));
}
BENCHMARK(BM_SocialOptimumScada)->Unit(benchmark::kMillisecond);

// Cold cache on the first iteration only; later iterations measure the
// grid comparison over cached predictions.
void BM_FitNetworkA(benchmark::State& state) {
  const auto g = build_session_network("A").graph;
  std::vector<RoundRecord> rounds;
  const auto alloc = predicted_allocation(g, 24.0, 0.6, 0.0);
  for (int i = 1; i <= 10; ++i) rounds.push_back({i, alloc, Outcome::kDefended, {}});
  for (auto _ : state) benchmark::DoNotOptimize(fit_alpha_eta(g, 24.0, rounds));
}
BENCHMARK(BM_FitNetworkA)->Unit(benchmark::kMillisecond);

void BM_MinCutEnumeration(benchmark::State& state) {
  const auto g = build_der1().graph;
  std::vector<NodeIndex> src = {g.node_index("S")};
  std::vector<NodeIndex> dst;
  for (const auto& a : g.critical_assets()) dst.push_back(g.node_index(a.node));
  for (auto _ : state) benchmark::DoNotOptimize(min_edge_cut(g, src, dst));
}
BENCHMARK(BM_MinCutEnumeration);

}  // namespace

BENCHMARK_MAIN();
