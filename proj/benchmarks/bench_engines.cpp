#include <benchmark/benchmark.h>

#include <random>

#include "cqdyn/evolution.hpp"
#include "cqdyn/scenario.hpp"

using namespace cqdyn;

namespace {

Matrix random_hermitian(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto u = [&] { return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0; };
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(u(), u());
  return (m + m.adjoint()) / 2.0;
}

void BM_tensor_product(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_hermitian(n, 1);
  const Matrix b = random_hermitian(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(tensor_product(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_tensor_product)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_hermitian_eig(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix a = random_hermitian(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_hermitian_eig)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_physical_states(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Clock clock = build_clock({d, 0.0, 4.0 / d});
  Matrix h_s(2, 2);
  h_s << 2.0 * 3.14159265358979 / 4.0, 0.0, 0.0, 0.61;
  const TotalHamiltonian total =
      assemble_total(clock, h_s, InteractionSpec::make_none());
  for (auto _ : state) benchmark::DoNotOptimize(physical_states(total, 0.0, true));
}
BENCHMARK(BM_physical_states)->RangeMultiplier(2)->Range(16, 128);

void BM_series_propagators(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto config = scenario::preset("p3_generic_kernel");
  config.clock.dim = d;
  config.clock.dt = 4.0 / d;
  const Clock clock = build_clock(config.clock);
  const Matrix h_s = scenario::system_hamiltonian(config.system);
  const InteractionSpec inter =
      scenario::build_interaction(config.interaction, config.clock, 2);
  const KernelOperator kernel = build_kernel(inter, clock, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(series_propagators(h_s, kernel, 2, 0, clock));
}
BENCHMARK(BM_series_propagators)->RangeMultiplier(2)->Range(16, 128);

void BM_picard_solve(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto config = scenario::preset("p3_generic_kernel");
  config.clock.dim = d;
  config.clock.dt = 4.0 / d;
  const Clock clock = build_clock(config.clock);
  const Matrix h_s = scenario::system_hamiltonian(config.system);
  const InteractionSpec inter =
      scenario::build_interaction(config.interaction, config.clock, 2);
  const KernelOperator kernel = build_kernel(inter, clock, 2);
  Vector psi0(2);
  psi0 << Complex(1.0, 0.0), Complex(0.0, 0.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(picard_solve(h_s, kernel, psi0, 0, clock, 200, 1e-12));
}
BENCHMARK(BM_picard_solve)->RangeMultiplier(2)->Range(16, 128);

void BM_verify_p2(benchmark::State& state) {
  const auto config = scenario::preset("p2_separable_drive");
  for (auto _ : state) benchmark::DoNotOptimize(scenario::verify_scenario(config));
}
BENCHMARK(BM_verify_p2);

}  // namespace

BENCHMARK_MAIN();
