// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs OpenMP kernels: forward stepping, transpose pass,
// and the weighted certification quadrature.

#include <benchmark/benchmark.h>

#include "cascade/certify.hpp"
#include "cascade/control.hpp"
#include "cascade/solver.hpp"

namespace {

cascade::ProblemConfig desk_config(int n) {
  cascade::ProblemConfig cfg;
  cfg.time_horizon = 0.4;
  cfg.max_age = 1.0;
  cfg.age_cutoff = 0.5;
  cfg.omega = {0.4, 0.7};
  cfg.omega1 = {0.45, 0.65};
  cfg.nu = 1.0;
  cfg.grid = {n, n, (n * 2) / 5, 0.4, 1.0};
  cfg.k1 = {cascade::DispersionSpec::Kind::power, 0.3, 1.0, 0.6, {}};
  cfg.k2 = {cascade::DispersionSpec::Kind::power, 0.6, 1.0, 0.6, {}};
  cfg.rates.mu1 = {cascade::RateSpec::Kind::constant, 0.2, 0, 0, {}, 0, 0, 0};
  cfg.rates.mu2 = {cascade::RateSpec::Kind::constant, 0.2, 0, 0, {}, 0, 0, 0};
  cfg.rates.mu3 = {cascade::RateSpec::Kind::constant, 1.0, 0, 0, {}, 0, 0, 0};
  cfg.rates.beta1 = {cascade::RateSpec::Kind::ramp_age, 1.0, 0, 0, {}, 0, 0, 0};
  cfg.rates.beta2 = {cascade::RateSpec::Kind::ramp_age, 1.0, 0, 0, {}, 0, 0, 0};
  return cfg;
}

cascade::Field2D bump(const cascade::GridSpec& g) {
  cascade::Field2D f(g);
  for (int i = 0; i <= g.n_a; ++i)
    for (int j = 1; j < g.n_x; ++j) {
      const double a = g.a_node(i), x = g.x_node(j);
      f.at(i, j) = std::exp(-std::pow((a - 0.32) / 0.13, 2) -
                            std::pow((x - 0.55) / 0.12, 2));
    }
  return f;
}

void bench_forward(benchmark::State& state, cascade::Exec exec) {
  const cascade::Problem pb(desk_config(static_cast<int>(state.range(0))));
  const cascade::Field2D y0 = bump(pb.grid());
  const cascade::Field2D p0 = bump(pb.grid());
  for (auto _ : state) {
    auto traj = cascade::solve_forward(pb, y0, p0, nullptr, exec);
    benchmark::DoNotOptimize(traj.y.back().data().data());
  }
}

void bench_transpose(benchmark::State& state, cascade::Exec exec) {
  const cascade::Problem pb(desk_config(static_cast<int>(state.range(0))));
  const cascade::Field2D r = bump(pb.grid());
  for (auto _ : state) {
    auto g = cascade::discrete_adjoint_apply(pb, r, r, exec);
    benchmark::DoNotOptimize(g.data().data());
  }
}

void bench_weighted_quadrature(benchmark::State& state, cascade::Exec exec) {
  const cascade::Problem pb(desk_config(static_cast<int>(state.range(0))));
  const cascade::WeightParams wp = cascade::default_weight_params(pb.config());
  cascade::AdjointSources src;
  src.mode = cascade::AdjointSources::Mode::renewal;
  const cascade::Field2D uT = bump(pb.grid());
  const cascade::Field2D vT = bump(pb.grid());
  const auto traj = cascade::solve_adjoint(pb, uT, vT, src, exec);
  for (auto _ : state) {
    auto e = cascade::carleman_eval(pb, traj, wp, cascade::CarlemanVariant::renewal,
                                    1.0, nullptr, &uT, &vT, 1.0, exec);
    benchmark::DoNotOptimize(e.ratio);
  }
}

}  // namespace

BENCHMARK_CAPTURE(bench_forward, serial, cascade::Exec::serial)->Arg(100);
BENCHMARK_CAPTURE(bench_forward, openmp, cascade::Exec::parallel)->Arg(100);
BENCHMARK_CAPTURE(bench_transpose, serial, cascade::Exec::serial)->Arg(100);
BENCHMARK_CAPTURE(bench_transpose, openmp, cascade::Exec::parallel)->Arg(100);
BENCHMARK_CAPTURE(bench_weighted_quadrature, serial, cascade::Exec::serial)->Arg(100);
BENCHMARK_CAPTURE(bench_weighted_quadrature, openmp, cascade::Exec::parallel)->Arg(100);

BENCHMARK_MAIN();
