// Serial reference vs OpenMP kernel timings. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>

#include "distkp/consensus.hpp"
#include "distkp/kernel.hpp"
#include "distkp/nystrom.hpp"
#include "distkp/sim.hpp"

using namespace distkp;

namespace {

const Box kDomain = make_box(2, 0.0, 20.0);
const KernelSpec kKernel{KernelFamily::Laplace, 2.0};

template <bool Parallel>
void BM_CovMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = sample_representative_points(kDomain, n, 1);
  const auto b = sample_representative_points(kDomain, n, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? cov_matrix(kKernel, a, b) : serial::cov_matrix(kKernel, a, b));
  }
}

template <bool Parallel>
void BM_FeatureMatrix(benchmark::State& state) {
  const auto basis = build_basis(kKernel, sample_representative_points(kDomain, 100, 1));
  const auto grid = uniform_grid(kDomain, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? feature_matrix(basis, grid) : serial::feature_matrix(basis, grid));
  }
}

template <bool Parallel>
void BM_ConsensusStep(benchmark::State& state) {
  const auto dim = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  ConsensusPool pool;
  for (int i = 0; i < 16; ++i) {
    Matrix m(dim, dim);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
    pool.push_back(InfoState{Vector::Ones(dim), m * m.transpose()});
  }
  const auto graph = build_graph(sample_representative_points(kDomain, 16, 4), 8.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? consensus_step(pool, graph, ConsensusWeights::Uniform)
                                      : serial::consensus_step(pool, graph, ConsensusWeights::Uniform));
  }
}

template <bool Parallel>
void BM_FieldEstimate(benchmark::State& state) {
  const auto basis = build_basis(kKernel, sample_representative_points(kDomain, 100, 1));
  const Matrix features = feature_matrix(basis, uniform_grid(kDomain, static_cast<std::size_t>(state.range(0))));
  const FilterState s = init_state(basis.retained_rank(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? field_estimate(s, features) : serial::field_estimate(s, features));
  }
}

}  // namespace

BENCHMARK(BM_CovMatrix<false>)->Arg(100)->Arg(400);
BENCHMARK(BM_CovMatrix<true>)->Arg(100)->Arg(400);
BENCHMARK(BM_FeatureMatrix<false>)->Arg(16)->Arg(50);
BENCHMARK(BM_FeatureMatrix<true>)->Arg(16)->Arg(50);
BENCHMARK(BM_ConsensusStep<false>)->Arg(50)->Arg(100);
BENCHMARK(BM_ConsensusStep<true>)->Arg(50)->Arg(100);
BENCHMARK(BM_FieldEstimate<false>)->Arg(50);
BENCHMARK(BM_FieldEstimate<true>)->Arg(50);

BENCHMARK_MAIN();
