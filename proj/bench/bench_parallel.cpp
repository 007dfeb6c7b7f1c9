#include <random>

#include <benchmark/benchmark.h>

#include "nlreg/kernel.hpp"
#include "nlreg/robust_kpca.hpp"

namespace {

Eigen::MatrixXd random_points(Eigen::Index d, Eigen::Index n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd S(d, n);
  for (auto& v : S.reshaped()) v = normal(rng);
  return S;
}

void BM_KernelMatrix(benchmark::State& state) {
  const Eigen::MatrixXd S = random_points(12, state.range(0));
  const auto k = nlreg::KernelModel::rbf(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::kernel_matrix(S, k));
}

void BM_KernelMatrixSerial(benchmark::State& state) {
  const Eigen::MatrixXd S = random_points(12, state.range(0));
  const auto k = nlreg::KernelModel::rbf(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::kernel_matrix_serial(S, k));
}

void BM_PairwiseDistances(benchmark::State& state) {
  const Eigen::MatrixXd S = random_points(12, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::pairwise_distances(S));
}

void BM_PairwiseDistancesSerial(benchmark::State& state) {
  const Eigen::MatrixXd S = random_points(12, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::pairwise_distances_serial(S));
}

Eigen::VectorXd random_spectrum(Eigen::Index n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  Eigen::VectorXd l(n);
  for (auto& v : l) v = u(rng);
  return l;
}

void BM_ShrinkSpectrum(benchmark::State& state) {
  const Eigen::VectorXd l = random_spectrum(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::shrink_spectrum(l, {0.1, 1.0}));
}

void BM_ShrinkSpectrumSerial(benchmark::State& state) {
  const Eigen::VectorXd l = random_spectrum(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nlreg::shrink_spectrum_serial(l, {0.1, 1.0}));
}

}  // namespace

BENCHMARK(BM_KernelMatrix)->Arg(100)->Arg(500)->Arg(1000);
BENCHMARK(BM_KernelMatrixSerial)->Arg(100)->Arg(500)->Arg(1000);
BENCHMARK(BM_PairwiseDistances)->Arg(100)->Arg(500)->Arg(1000);
BENCHMARK(BM_PairwiseDistancesSerial)->Arg(100)->Arg(500)->Arg(1000);
BENCHMARK(BM_ShrinkSpectrum)->Arg(1000)->Arg(10000);
BENCHMARK(BM_ShrinkSpectrumSerial)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
