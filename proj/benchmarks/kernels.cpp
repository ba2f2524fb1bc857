#include <random>

#include <benchmark/benchmark.h>

#include "netimg/fusion.hpp"
#include "netimg/interp.hpp"
#include "netimg/numerics.hpp"
#include "netimg/pipeline.hpp"
#include "netimg/single_view.hpp"

namespace {

using namespace netimg;

CMat random_hpd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0, 1);
  CMat a(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = Complex(g(rng), g(rng));
  }
  return a * a.adjoint() / n + CMat::Identity(n, n);
}

void BM_Rank1Update(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  auto inv = HermitianInverse::from_matrix(random_hpd(rng, n), 1 << 30);
  const CVec v = CVec::Random(n);
  double s = 1e-3;
  for (auto _ : state) {
    inv.rank1_update(v, s);
    s = -s;  // alternate so the matrix stays bounded
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Rank1Update)->RangeMultiplier(2)->Range(64, 256)->Complexity(benchmark::oNSquared);

void BM_CoordinateStep(benchmark::State& state) {
  RunConfig c = preset("fig2");
  c.q = 400;
  const Scene scene = c.effective_scene();
  const Pilot pilot = make_run_pilot(c);
  const ArrayResponse resp(scene, 0, pilot);
  GridModel grid = uniform_grid(scene, 0, c.q);
  const Dictionary dict = build_dictionary(resp, grid.positions);
  std::mt19937_64 rng(2);
  const double noise = c.noise_variance();
  const auto data = CovarianceData::make(random_hpd(rng, dict.dim()) * noise, noise);
  auto inv = model_covariance_inverse(grid, dict, noise);
  const double eta = default_eta(grid, 10.0);
  int q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(coordinate_step(grid, dict, inv, data, q, eta));
    q = (q + 1) % grid.size();
  }
}
BENCHMARK(BM_CoordinateStep);

void BM_SibsonWeights(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 15);
  std::vector<Vec2> sites(static_cast<std::size_t>(n) * n);
  for (auto& s : sites) s = Vec2(u(rng), u(rng));
  const RasterSpec spec{60, 60, {0, 15, 0, 15}};
  const auto centers = spec.centers();
  for (auto _ : state) benchmark::DoNotOptimize(sibson_weights(sites, centers, spec.roi, 8 * spec.q1));
}
BENCHMARK(BM_SibsonWeights)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_FusionGammaUpdate(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  FusionInputs in;
  in.spec = RasterSpec{side, side, {0, 15, 0, 15}};
  for (int k = 0; k < 3; ++k) {
    in.images.push_back(RVec::NullaryExpr(side * side, [&] { return u(rng); }));
    in.gamma_beta.push_back(RVec::NullaryExpr(side * side, [&] { return 0.1 + u(rng); }));
  }
  const TVOperator d(side, side);
  FusionState st;
  st.gamma = RVec::Zero(side * side);
  st.lambda = RMat::Ones(3, side * side);
  st.z = RVec::Zero(2 * side * side);
  st.u = st.z;
  const ResolvedPenalties pen{0.01, 0.001, 1.0};
  const FusionConfig cfg;
  for (auto _ : state) {
    st.gamma.setZero();
    benchmark::DoNotOptimize(gamma_update(st, in, d, pen, cfg));
  }
}
BENCHMARK(BM_FusionGammaUpdate)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
