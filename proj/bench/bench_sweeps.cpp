// Serial reference vs OpenMP kernels: scenario sweep over lg, pole sweep over ka.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "cvfad/plant.hpp"
#include "cvfad/sim.hpp"

using namespace cvfad;

namespace {

sim::ScenarioConfig tmpl() {
  auto c = sim::table1_scenario(0.5e-3);
  c.t_end_s = 0.1;
  return c;
}

std::vector<double> lg_grid() {
  std::vector<double> v;
  for (int i = 1; i <= 12; ++i) v.push_back(0.5e-3 * i);
  return v;
}

std::vector<double> ka_grid() {
  std::vector<double> v;
  for (int i = 0; i <= 200; ++i) v.push_back(12.0 * i / 200.0);
  return v;
}

void BM_SweepSerial(benchmark::State& st) {
  const auto c = tmpl();
  const auto v = lg_grid();
  for (auto _ : st) benchmark::DoNotOptimize(sim::sweep_serial(c, sim::SweepAxis::Lg, v));
}

void BM_SweepParallel(benchmark::State& st) {
  const auto c = tmpl();
  const auto v = lg_grid();
  st.counters["threads"] = omp_get_max_threads();
  for (auto _ : st) benchmark::DoNotOptimize(sim::sweep(c, sim::SweepAxis::Lg, v));
}

void BM_PoleSweepSerial(benchmark::State& st) {
  const auto c = tmpl();
  const auto v = ka_grid();
  for (auto _ : st) benchmark::DoNotOptimize(plant::ka_pole_sweep_serial(c.lcl, c.loop, c.ts_control_s, 0, v));
}

void BM_PoleSweepParallel(benchmark::State& st) {
  const auto c = tmpl();
  const auto v = ka_grid();
  st.counters["threads"] = omp_get_max_threads();
  for (auto _ : st) benchmark::DoNotOptimize(plant::ka_pole_sweep(c.lcl, c.loop, c.ts_control_s, 0, v));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PoleSweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PoleSweepParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
