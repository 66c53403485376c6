#include <benchmark/benchmark.h>

#include <cmath>

#include "twistbeam/decomposition.hpp"
#include "twistbeam/envelope.hpp"
#include "twistbeam/oracle.hpp"
#include "twistbeam/propagation.hpp"

using namespace twistbeam;

namespace {

double glaser_omega(double z) { return 2.0 * 16.0 / (16.0 + (z - 15.0) * (z - 15.0)); }

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

void BM_Synthesize(benchmark::State& state) {
  const auto spec = decomposition::decompose({decomposition::HalfBlockedState{0, 1}}, Truncation::around(1));
  const auto env = envelope::solve_ermakov(glaser_omega, 1.0, 0.0, 0.0, 30.0);
  propagation::GridSpec grid;
  grid.n_rho = 192;
  grid.n_phi = 128;
  for (auto _ : state) benchmark::DoNotOptimize(propagation::synthesize(spec, env, -1, 16.0, grid, mode(state)));
}

void BM_OverlapTable(benchmark::State& state) {
  const decomposition::InitialState s{decomposition::HalfBlockedState{0, 1}};
  const auto psi = decomposition::state_sampler(s);
  decomposition::QuadSpec quad;
  quad.radial_order = 96;
  quad.angular_order = 64;
  quad.angular_breakpoints = decomposition::angular_breakpoints(s);
  quad.convergence_tol = 1.0;
  const Truncation trunc{6, -8, 10};
  for (auto _ : state) benchmark::DoNotOptimize(decomposition::overlap_table(psi, trunc, {}, quad, mode(state)));
}

void BM_Oracle(benchmark::State& state) {
  oracle::OracleConfig cfg;
  cfg.l_min = -3;
  cfg.l_max = 5;
  cfg.n_rho = 256;
  cfg.dz = 1e-2;
  cfg.richardson_levels = 1;
  cfg.boundary_tol = 1.0;
  cfg.n_phi = 64;
  cfg.angular_breakpoints = {0.0, 3.14159265358979323846};
  const auto psi0 = oracle::half_blocked_state(0, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(oracle::oracle_propagate(psi0, glaser_omega, -1, 0.0, {5.0}, cfg, mode(state)));
}

}  // namespace

BENCHMARK(BM_Synthesize)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlapTable)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Oracle)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
