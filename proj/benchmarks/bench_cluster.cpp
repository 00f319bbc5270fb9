#include <benchmark/benchmark.h>

#include <random>

#include "compsim/cluster.hpp"

namespace {

Eigen::MatrixXd blobs(Eigen::Index n, Eigen::Index d, int k) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) x(i, c) = normal(gen) + (c == i % k ? 4.0 : 0.0);
  }
  return x;
}

void BM_KMeans(benchmark::State& state) {
  const auto x = blobs(state.range(0), 10, 11);
  for (auto _ : state) benchmark::DoNotOptimize(compsim::kmeans(x, 11, 0));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_Agglomerative(benchmark::State& state) {
  const auto x = blobs(state.range(0), 10, 11);
  for (auto _ : state) benchmark::DoNotOptimize(compsim::agglomerative(x, 11, compsim::Linkage::Ward));
}
BENCHMARK(BM_Agglomerative)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

void BM_Spectral(benchmark::State& state) {
  const auto x = blobs(state.range(0), 10, 11);
  for (auto _ : state) benchmark::DoNotOptimize(compsim::spectral_cluster(x, 11, {}, 0));
}
BENCHMARK(BM_Spectral)->Arg(500)->Arg(1500)->Unit(benchmark::kMillisecond);

} // namespace
