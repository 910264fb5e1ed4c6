#include <benchmark/benchmark.h>

#include <string>

#include "stockflow/stockflow.hpp"

namespace {

// A closed chain S0 -> S1 -> ... -> S{n-1} where flow k depends on its source stock.
sfd::StockFlowDiagram chain(int n) {
  std::string stocks, flows, inflows, outflows, links;
  for (int k = 0; k < n; ++k) {
    std::string s = "\"S" + std::to_string(k) + "\"";
    stocks += (k ? "," : "") + s;
    if (k + 1 == n) continue;
    std::string f = "\"f" + std::to_string(k) + "\"";
    std::string sep = k ? "," : "";
    flows += sep + "{\"id\":" + f + ",\"fn\":\"0.1 * l" + std::to_string(k) + "\"}";
    outflows += sep + "{\"flow\":" + f + ",\"from\":" + s + "}";
    inflows += sep + "{\"flow\":" + f + ",\"to\":\"S" + std::to_string(k + 1) + "\"}";
    links += sep + "{\"id\":\"l" + std::to_string(k) + "\",\"flow\":" + f + ",\"source\":" + s + "}";
  }
  return sfd::from_json("{\"stocks\":[" + stocks + "],\"flows\":[" + flows + "],\"inflows\":[" + inflows +
                        "],\"outflows\":[" + outflows + "],\"links\":[" + links + "]}");
}

void BM_DecompositionRoundTrip(benchmark::State& state) {
  sfd::StockFlowDiagram X = chain(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sfd::recompose(sfd::elements_category(X)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DecompositionRoundTrip)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_Pushout(benchmark::State& state) {
  auto Z = sfd::share(chain(static_cast<int>(state.range(0))));
  auto Y = sfd::share(chain(static_cast<int>(state.range(0))));
  auto apex = sfd::share(sfd::disc({"*"}));
  sfd::DiagramMorphism s1(apex, Z), s2(apex, Y);
  s1.component(sfd::SchemaObject::Stock).set("*", Z->stocks().ids().back());
  s2.component(sfd::SchemaObject::Stock).set("*", Y->stocks().ids().front());
  for (auto _ : state) benchmark::DoNotOptimize(sfd::presheaf_pushout(sfd::SpanOfDiagrams{apex, s1, s2}));
}
BENCHMARK(BM_Pushout)->RangeMultiplier(2)->Range(4, 64);

void BM_SimulateRk4(benchmark::State& state) {
  sfd::StockFlowDiagram X = chain(static_cast<int>(state.range(0)));
  sfd::SimConfig cfg;
  for (const auto& s : X.stocks()) cfg.init[s] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(sfd::simulate(X, cfg));
}
BENCHMARK(BM_SimulateRk4)->RangeMultiplier(2)->Range(4, 64);

}  // namespace

BENCHMARK_MAIN();
