#include <benchmark/benchmark.h>

#include <random>

#include "compsim/classify.hpp"

namespace {

void BM_FitSoftmax(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, 64);
  std::vector<std::string> y;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < 64; ++c) x(i, c) = normal(gen) + (c == i % 11 ? 1.0 : 0.0);
    y.push_back("s" + std::to_string(i % 11));
  }
  for (auto _ : state) benchmark::DoNotOptimize(compsim::fit(x, y));
}
BENCHMARK(BM_FitSoftmax)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

} // namespace
