// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "xling/dataset.h"
#include "xling/digest.h"
#include "xling/gateway.h"
#include "xling/rng.h"
#include "xling/segment.h"

namespace {

using namespace xling;

void BM_FilterTop(benchmark::State& state) {
  Rng rng(1);
  std::vector<dataset::ScoredItem> items;
  const std::vector<std::string> langs = {"deu", "por", "hun", "lit", "gle", "mlt", "zho", "hin"};
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    items.push_back({"item-" + std::to_string(i), langs[i % 8], rng.unit()});
  }
  dataset::FilterConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dataset::filter_top(items, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FilterTop)->Arg(1000)->Arg(40000);

void BM_Segment(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < 50; ++i) {
    text += "- Dr. Lee measured 3.5 litres. Was it enough? Yes!\n";
    text += "这是第" + std::to_string(i) + "句。\n\n";
  }
  translation::RuleSegmenter seg;
  for (auto _ : state) benchmark::DoNotOptimize(seg.segment(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Segment);

void BM_Sha256(benchmark::State& state) {
  const std::string data(static_cast<std::size_t>(state.range(0)), 'x');
  for (auto _ : state) benchmark::DoNotOptimize(sha256_hex(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(4096);

void BM_CacheKey(benchmark::State& state) {
  gateway::ModelEndpoint ep{"model", "http://localhost:1", "", gateway::Role::kTranslator};
  const auto req = gateway::make_user_request(ep, std::string(800, 'a') + " Café", {0.0, 2048, {}});
  for (auto _ : state) benchmark::DoNotOptimize(gateway::make_cache_key(req));
}
BENCHMARK(BM_CacheKey);

}  // namespace

BENCHMARK_MAIN();
