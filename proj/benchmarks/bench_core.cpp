#include <benchmark/benchmark.h>

#include "pcd/choice_model.hpp"
#include "pcd/design_space.hpp"
#include "pcd/normal.hpp"
#include "pcd/optimize.hpp"

namespace {

void BvnCdf(benchmark::State& state) {
  const double rho = state.range(0) / 100.0;
  double x = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pcd::bvn_cdf(x, 0.7, pcd::Correlation(rho)).value);
    x += 1e-6;
  }
}
BENCHMARK(BvnCdf)->Arg(0)->Arg(50)->Arg(95);

void IntensityTriple(benchmark::State& state) {
  pcd::ModelSpec spec;
  spec.kind = pcd::ModelKind::kDependent;
  spec.n_attributes = 4;
  spec.sigma0_sq = 0.125;
  spec.has_quantitative = true;
  const pcd::Beta beta = pcd::Beta::standardized(spec);
  const pcd::ChoiceSet cs = pcd::orbit_representative(
      pcd::OrbitTriple{3, 3, 2}, spec, {0.8, -0.3, 0.0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcd::intensity_matrix(cs, beta, spec));
  }
}
BENCHMARK(IntensityTriple);

void ZStar(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcd::optimize_zstar(state.range(0)).z_star);
  }
}
BENCHMARK(ZStar)->Arg(2)->Arg(11)->Arg(101);

void OrbitSweep(benchmark::State& state) {
  pcd::SweepConfig cfg;
  cfg.n_attributes = static_cast<int>(state.range(0));
  cfg.sigma0_sq = 1.0 / (2.0 * cfg.n_attributes);
  cfg.kind = pcd::ModelKind::kDependent;
  cfg.quantitative = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pcd::sweep_orbits(cfg));
  }
}
BENCHMARK(OrbitSweep)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
