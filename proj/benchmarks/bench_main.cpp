#include <benchmark/benchmark.h>

#include "kernelpf/asymptotics.hpp"
#include "kernelpf/simulate.hpp"

using namespace kernelpf;

namespace {

std::shared_ptr<DenseKernel> dense_fixture(std::size_t size) {
  Rng rng(1234);
  std::vector<std::vector<double>> M(size, std::vector<double>(size));
  for (auto& row : M)
    for (double& v : row) v = 0.1 + rng.uniform();
  std::vector<double> gamma(size, 1.0 / double(size));
  std::vector<double> g(size);
  for (std::size_t i = 0; i < size; ++i) {
    double cap = 1e300;
    for (std::size_t j = 0; j < size; ++j) cap = std::min(cap, M[i][j] / gamma[j]);
    g[i] = 0.6 * cap;
  }
  std::vector<std::string> labels(size);
  for (std::size_t i = 0; i < size; ++i) labels[i] = std::to_string(i);
  return DenseKernel::from_full(TypeSpace::finite(labels), Matrix::from_rows(M), g, gamma);
}

void BM_classify_dense(benchmark::State& state) {
  auto kernel = dense_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classify(*kernel, 200));
}
BENCHMARK(BM_classify_dense)->Arg(4)->Arg(16)->Arg(64);

void BM_classify_analytic(benchmark::State& state) {
  auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2,
                                       static_cast<std::size_t>(state.range(0)), 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(classify(*kernel, 200));
}
BENCHMARK(BM_classify_analytic)->Arg(100)->Arg(400);

void BM_quadrature_trace(benchmark::State& state) {
  auto twin = AnalyticKernel::create(2.0, 2.0, 0.2,
                                     static_cast<std::size_t>(state.range(0)), 20.0)
                  ->quadrature_twin();
  const auto spectral = classify(*twin, 200);
  for (auto _ : state)
    benchmark::DoNotOptimize(twin->scaled_iterates(
        KernelPart::Full, spectral.R, Point::at(0.0), SetDescriptor::interval(1.0), 100));
}
BENCHMARK(BM_quadrature_trace)->Arg(100)->Arg(200);

void BM_perron_limit_analytic(benchmark::State& state) {
  auto kernel = AnalyticKernel::create(2.0, 2.0, 0.2, 200, 20.0);
  PerronLimitOptions options;
  options.n_max = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        perron_limit(*kernel, Point::at(0.0), SetDescriptor::interval(1.0), options));
}
BENCHMARK(BM_perron_limit_analytic)->Arg(100)->Arg(500);

void BM_simulate_life_records(benchmark::State& state) {
  const Preset preset = build_preset("analytic-example");
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng = Rng::stream(7, seed++);
    benchmark::DoNotOptimize(
        simulate_life_record(preset.reproduction, preset.cluster, rng, 8));
  }
}
BENCHMARK(BM_simulate_life_records);

void BM_estimate_series(benchmark::State& state) {
  const Preset preset = build_preset("split-chain");
  for (auto _ : state)
    benchmark::DoNotOptimize(
        estimate_series(preset.reproduction, preset.cluster, 2000, 8, 3, 1));
}
BENCHMARK(BM_estimate_series);

}  // namespace

BENCHMARK_MAIN();
