#include <benchmark/benchmark.h>

#include <random>

#include "gnp/dynamics.hpp"
#include "gnp/fockoracle.hpp"
#include "gnp/kernels.hpp"
#include "gnp/matcore.hpp"
#include "gnp/phasespace.hpp"

namespace {

using gnp::CMatrix;
namespace k = gnp::kernels;

CMatrix random_symmetric(int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
  }
  return m;
}

void BM_MatExp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CMatrix jh = gnp::mat::J(n) * random_symmetric(2 * n, 7);
  for (auto _ : state) benchmark::DoNotOptimize(gnp::mat::mat_exp(jh));
}
BENCHMARK(BM_MatExp)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_GToR(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> omegas(n), squeezes(n);
  for (int k = 0; k < n; ++k) {
    omegas[k] = 0.5 + 0.25 * k;
    squeezes[k] = 0.1 * (k + 1);
  }
  const CMatrix g = k::make_squeezed_thermal(omegas, squeezes).get(k::Form::G);
  for (auto _ : state) benchmark::DoNotOptimize(k::g_to_r(g));
}
BENCHMARK(BM_GToR)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void BM_Rk4Normal(benchmark::State& state) {
  const int steps = static_cast<int>(state.range(0));
  const CMatrix r0 = -0.5 * gnp::mat::E(2);
  const CMatrix h = random_symmetric(4, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gnp::dynamics::integrate_rk4(gnp::dynamics::Flow::Normal, r0, h, 2.0, steps));
  }
}
BENCHMARK(BM_Rk4Normal)->Arg(200)->Arg(2000);

void BM_HusimiGrid(benchmark::State& state) {
  const k::ConventionBridge bridge{k::RMap::Negate, k::PrefactorRule::TraceNormalized, 0.0};
  const auto gs = k::make_squeezed_thermal({0.7}, {0.3});
  gnp::phase::PhaseGrid grid;
  grid.re = {-3.0, 3.0, static_cast<int>(state.range(0))};
  grid.im = grid.re;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gnp::phase::grid_eval(gs, gnp::phase::FunctionKind::Husimi, grid, k::Convention::Calibrated, &bridge));
  }
}
BENCHMARK(BM_HusimiGrid)->Arg(41)->Arg(121);

void BM_GaussianDensity(benchmark::State& state) {
  const auto spec = gnp::fock::squeezed_thermal_spec({0.7}, {0.5});
  const int cutoff = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gnp::fock::gaussian_density(spec, cutoff));
}
BENCHMARK(BM_GaussianDensity)->Arg(30)->Arg(40);

void BM_Calibrate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gnp::fock::calibrate(gnp::fock::kDefaultCutoff));
}
BENCHMARK(BM_Calibrate)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
