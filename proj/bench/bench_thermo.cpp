// Per-sample thermodynamic records: OpenMP kernel against the serial reference.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "qbcat/thermo.hpp"

namespace {

struct Fixture {
  qbcat::ModelParams p;
  qbcat::SolverConfig cfg;
  qbcat::Trajectory traj;

  Fixture() {
    cfg.t_max = 50.0;
    cfg.set_uniform_grid(501);
    traj = qbcat::integrate(qbcat::ground_state(p), p, cfg);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_ThermoSerial(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto mode = static_cast<qbcat::FdMode>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qbcat::thermo_series_serial(f.traj, f.p, f.cfg, mode));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.traj.times.size()));
}

void BM_ThermoParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  const auto mode = static_cast<qbcat::FdMode>(state.range(0));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(qbcat::thermo_series(f.traj, f.p, f.cfg, mode));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.traj.times.size()));
}

void BM_Integrate(benchmark::State& state) {
  qbcat::ModelParams p;
  qbcat::SolverConfig cfg;
  cfg.t_max = 50.0;
  cfg.set_uniform_grid(501);
  for (auto _ : state) benchmark::DoNotOptimize(qbcat::integrate(qbcat::ground_state(p), p, cfg));
}

}  // namespace

// range(0): FdMode (0 exact, 2 both); range(1): threads
BENCHMARK(BM_ThermoSerial)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ThermoParallel)
    ->ArgsProduct({{0, 2}, {1, 2, 4}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
