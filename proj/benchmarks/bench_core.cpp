#include <benchmark/benchmark.h>

#include <random>

#include "ww2d/evolve.hpp"
#include "ww2d/lab.hpp"

using namespace ww2d;

namespace {

SpectralField random_field(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(g->n);
  for (auto& x : v) x = cplx(gauss(rng), gauss(rng));
  return SpectralField::from_values(g, std::move(v));
}

void BM_transform_round_trip(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto f = random_field(g, 1);
  for (auto _ : state) {
    auto rt = SpectralField::from_values(g, f.values());
    benchmark::DoNotOptimize(rt.coeffs().data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_transform_round_trip)->RangeMultiplier(2)->Range(256, 4096)->Complexity();

void BM_para_low_high(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto f = random_field(g, 2);
  auto h = random_field(g, 3);
  for (auto _ : state) {
    auto t = para_low_high(f, h);
    benchmark::DoNotOptimize(t.coeffs().data());
  }
}
BENCHMARK(BM_para_low_high)->RangeMultiplier(2)->Range(256, 2048);

void BM_para_balanced(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto f = random_field(g, 4);
  auto h = random_field(g, 5);
  for (auto _ : state) {
    auto t = para_balanced(f, h, true);
    benchmark::DoNotOptimize(t.coeffs().data());
  }
}
BENCHMARK(BM_para_balanced)->RangeMultiplier(2)->Range(256, 2048);

void BM_rhs_diff(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto s = make_random_state(g, 0.05, 2.0, 2.5, 6, 20.0);
  for (auto _ : state) {
    auto r = rhs_diff(s);
    benchmark::DoNotOptimize(r.first_t.coeffs().data());
  }
}
BENCHMARK(BM_rhs_diff)->RangeMultiplier(2)->Range(128, 1024);

void BM_step_lawson4(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto s = make_random_state(g, 0.05, 2.0, 2.5, 7, 20.0);
  SolverConfig cfg;
  cfg.scheme = Scheme::lawson4;
  for (auto _ : state) {
    auto next = step(s, 0.05, Scheme::lawson4, cfg);
    benchmark::DoNotOptimize(next.Wa.coeffs().data());
  }
}
BENCHMARK(BM_step_lawson4)->RangeMultiplier(2)->Range(128, 1024);

void BM_control_params(benchmark::State& state) {
  auto g = make_grid(static_cast<int>(state.range(0)));
  auto s = make_random_state(g, 0.05, 2.0, 2.5, 8, 20.0);
  for (auto _ : state) {
    auto cp = control_params(s.Wa, s.R);
    benchmark::DoNotOptimize(cp.A);
  }
}
BENCHMARK(BM_control_params)->RangeMultiplier(2)->Range(256, 1024);

}  // namespace

BENCHMARK_MAIN();
