#include <benchmark/benchmark.h>

#include <random>

#include "compsim/attribution.hpp"

namespace {

void BM_CrossSectionalFit(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const int k = static_cast<int>(state.range(1));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  std::vector<std::string> ids;
  std::vector<int> clusters;
  compsim::MonthReturns month;
  for (int i = 0; i < n; ++i) {
    ids.push_back("C" + std::to_string(i));
    clusters.push_back(i % k);
    month[ids.back()] = 0.05 * normal(gen);
  }
  const compsim::ClusterAssignment assignment(ids, clusters);
  for (auto _ : state) benchmark::DoNotOptimize(compsim::cross_sectional_fit(month, assignment));
}
BENCHMARK(BM_CrossSectionalFit)->Args({3000, 11})->Args({3000, 100})->Unit(benchmark::kMillisecond);

} // namespace
