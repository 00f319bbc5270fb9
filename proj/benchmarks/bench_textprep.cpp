#include <benchmark/benchmark.h>

#include <random>

#include "compsim/textprep.hpp"

namespace {

std::string filing_like_text(std::size_t words) {
  std::mt19937 gen(1);
  static const char* vocab[] = {"revenue", "customers", "https://example.com/ir", "segment", "(the", "Company)",
                                "manufactures", "products,", "services.", "caf\xc3\xa9", "www.sec.gov", "market"};
  std::string text;
  for (std::size_t i = 0; i < words; ++i) {
    text += vocab[gen() % 12];
    text += i % 17 == 0 ? "\n" : " ";
  }
  return text;
}

void BM_CleanText(benchmark::State& state) {
  const auto text = filing_like_text(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compsim::clean_text(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_CleanText)->Arg(1700)->Arg(20000);

void BM_PrepareDocument(benchmark::State& state) {
  const auto text = filing_like_text(1700);
  compsim::ChunkingConfig config;
  config.context_budget = static_cast<std::size_t>(state.range(0));
  config.window = 512;
  for (auto _ : state) benchmark::DoNotOptimize(compsim::prepare_document(text, config, "X"));
}
BENCHMARK(BM_PrepareDocument)->Arg(512)->Arg(1536);

} // namespace
