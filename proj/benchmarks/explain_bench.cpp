#include <memory>
#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "zsx/explain.hpp"
#include "zsx/treeparse.hpp"

namespace {

std::vector<std::string> words(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(i));
  return out;
}

void BM_BfsSpans(benchmark::State& state) {
  const auto tree = zsx::fallback_tree(words(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(zsx::bfs_spans(tree));
}
BENCHMARK(BM_BfsSpans)->Arg(8)->Arg(32)->Arg(128);

void BM_ParseTree(benchmark::State& state) {
  const auto text = zsx::to_bracketed(zsx::fallback_tree(words(40)));
  for (auto _ : state) benchmark::DoNotOptimize(zsx::parse_tree(text));
}
BENCHMARK(BM_ParseTree);

void BM_Explain(benchmark::State& state, bool use_step) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  auto table = std::make_shared<zsx::VectorTable>("bench", 100);
  for (int i = 0; i < 200; ++i) {
    zsx::Vector v(100);
    for (double& x : v) x = normal(rng);
    table->insert("w" + std::to_string(i), std::move(v));
  }
  std::vector<zsx::Label> labels;
  std::vector<zsx::Descriptor> desc;
  for (int l = 0; l < 8; ++l) {
    labels.push_back({"label" + std::to_string(l), ""});
    for (int d = 0; d < 4; ++d) {
      desc.push_back({"w" + std::to_string(rng() % 200) + " w" + std::to_string(rng() % 200),
                      labels.back().id, zsx::Mode::kALL});
    }
  }
  const zsx::Scorer scorer(std::make_shared<zsx::LabelCatalog>(labels, desc),
                           std::make_shared<zsx::EmbeddingCosineProvider>(table));
  const auto tokens = words(static_cast<std::size_t>(state.range(0)));
  const auto tree = zsx::fallback_tree(tokens);
  const zsx::TextRef text{"t", zsx::join_tokens(tokens)};
  for (auto _ : state) {
    if (use_step) {
      benchmark::DoNotOptimize(zsx::step(text, tree, scorer));
    } else {
      benchmark::DoNotOptimize(zsx::ngramex(text, 3, scorer));
    }
  }
}
BENCHMARK_CAPTURE(BM_Explain, step, true)->Arg(12)->Arg(40);
BENCHMARK_CAPTURE(BM_Explain, ngramex, false)->Arg(12)->Arg(40);

}  // namespace
