#include <vector>

#include <benchmark/benchmark.h>

#include "dopo/engine.hpp"
#include "dopo/meanfield.hpp"
#include "dopo/oracles.hpp"
#include "dopo/rng.hpp"

using namespace dopo;

namespace {

SimConfig bench_config(Representation rep, Topology topo) {
  SimConfig c;
  c.representation = rep;
  c.topology = topo;
  c.p_target = 0.5;
  c.j = 7.0 / 3.0;
  c.b = 1e-4;
  c.dt = default_dt(rep);
  return c;
}

// Steps per second of the fused stepper, including the normal draws.
void BM_Step(benchmark::State& state, Representation rep, Topology topo) {
  const SimConfig c = bench_config(rep, topo);
  Stepper stepper(c);
  const NormalStream stream(trajectory_key(1, 0));
  PhaseState s = PhaseState::vacuum(c);
  for (auto _ : state) {
    stepper.step(s, stream);
    benchmark::DoNotOptimize(s.alpha.data());
  }
  state.SetItemsProcessed(state.iterations());
  state.counters["sites"] = c.topology.site_count();
}

BENCHMARK_CAPTURE(BM_Step, positive_p_pair, Representation::PositiveP, Topology::pair());
BENCHMARK_CAPTURE(BM_Step, wigner_pair, Representation::TruncWigner, Topology::pair());
BENCHMARK_CAPTURE(BM_Step, husimi_pair, Representation::TruncHusimi, Topology::pair());
BENCHMARK_CAPTURE(BM_Step, positive_p_ring16, Representation::PositiveP, Topology::ring(16));
BENCHMARK_CAPTURE(BM_Step, wigner_ring16, Representation::TruncWigner, Topology::ring(16));
BENCHMARK_CAPTURE(BM_Step, wigner_traveling16, Representation::TruncWigner, Topology::traveling_ring(16));
BENCHMARK_CAPTURE(BM_Step, positive_p_meanfield5, Representation::PositiveP, Topology::mean_field_pair(5));

void BM_Normals(benchmark::State& state) {
  const NormalStream stream(trajectory_key(1, 0));
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  std::uint64_t step = 0;
  for (auto _ : state) {
    stream.fill(step++, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Normals)->Arg(4)->Arg(32)->Arg(128);

void BM_Trajectory(benchmark::State& state) {
  SimConfig c = bench_config(Representation::PositiveP, Topology::pair());
  c.t_ramp = 10.0;
  c.t_total = 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trajectory(c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.total_steps()));
}
BENCHMARK(BM_Trajectory)->Unit(benchmark::kMillisecond);

void BM_PairLyapunov(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pair_covariance_lyapunov(0.5, 7.0 / 3.0));
}
BENCHMARK(BM_PairLyapunov);

void BM_LatticeCovariance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lattice_pair_covariance(0.5, 7.0 / 3.0, n, 1));
}
BENCHMARK(BM_LatticeCovariance)->Arg(16)->Arg(4096);

void BM_PairCriteria(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(pair_criteria_analytic(0.5, 7.0 / 3.0));
}
BENCHMARK(BM_PairCriteria);

void BM_MeanFieldLoop(benchmark::State& state) {
  const double p = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(self_consistent_loop(p, 7.0 / 3.0, 0.019, 1.0));
}
BENCHMARK(BM_MeanFieldLoop)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
