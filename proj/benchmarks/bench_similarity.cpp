#include <benchmark/benchmark.h>

#include <random>

#include "compsim/similarity.hpp"

namespace {

compsim::EmbeddingMatrix random_matrix(std::size_t n, std::size_t d) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(gen);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("C" + std::to_string(i));
  return compsim::EmbeddingMatrix("bench", 512, ids, m);
}

void BM_TopKPeers(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 384);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compsim::top_k_peers(m, m.ids()[q], 10));
    q = (q + 1) % m.size();
  }
}
BENCHMARK(BM_TopKPeers)->Arg(500)->Arg(3000);

} // namespace
