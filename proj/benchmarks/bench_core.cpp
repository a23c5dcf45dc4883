#include <benchmark/benchmark.h>

#include <cmath>

#include "homog/beltrami.hpp"
#include "homog/cell2d.hpp"
#include "homog/homog1d.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;

void BM_ExprEval(benchmark::State& state) {
  const homog::Expr e = homog::parse("1 + 0.5*sin(2*pi*Y1)*sin(2*pi*Y2) + ETA*cos(X1)");
  homog::Bindings b;
  b.set(homog::Var::X1, 0.3)
      .set(homog::Var::Y1, 0.7)
      .set(homog::Var::Y2, 0.11)
      .set(homog::Var::Eta, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(e.eval(b));
}
BENCHMARK(BM_ExprEval);

void BM_HarmonicMean(benchmark::State& state) {
  const auto kappa = [](double y) { return 1.0 + 0.5 * std::sin(2.0 * kPi * y); };
  for (auto _ : state)
    benchmark::DoNotOptimize(homog::harmonic_mean(kappa, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_HarmonicMean)->Arg(16)->Arg(128);

void BM_CellSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  homog::CellProblem2D p;
  p.grid = homog::PeriodicGrid2D::unit(n);
  p.kappa.resize(p.grid.cells());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      p.kappa[p.grid.index(i, j)] =
          1.0 + 0.5 * std::sin(2.0 * kPi * (p.grid.center(i) + p.grid.center(j)));
  for (auto _ : state)
    benchmark::DoNotOptimize(homog::solve_cell_2d(p, 1, 1e-10));
}
BENCHMARK(BM_CellSolve)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MetricEval(benchmark::State& state) {
  const auto chart =
      homog::SurfaceChart::graph(homog::parse("X1*X2 + ETA*sin(2*pi*Y1)*sin(2*pi*Y2)"));
  for (auto _ : state)
    benchmark::DoNotOptimize(homog::metric_cell(chart, 0.5, 0.25, 0.3, 0.8, 0.25));
}
BENCHMARK(BM_MetricEval);

}  // namespace

BENCHMARK_MAIN();
