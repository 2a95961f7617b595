#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "semidiag/models.hpp"
#include "semidiag/residuals.hpp"
#include "semidiag/simulation.hpp"
#include "semidiag/special_math.hpp"

using namespace semidiag;

namespace {

void BM_TweedieCdf(benchmark::State& state) {
  const math::TweedieParams params{2.0, 1.2, 1.5};
  double y = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(math::tweedie_cdf(y, params));
    y = y > 20.0 ? 0.1 : y * 1.1;
  }
}
BENCHMARK(BM_TweedieCdf);

void BM_TweedieLogpdf(benchmark::State& state) {
  const math::TweedieParams params{2.0, 1.2, 1.5};
  double y = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(math::tweedie_logpdf(y, params));
    y = y > 20.0 ? 0.1 : y * 1.1;
  }
}
BENCHMARK(BM_TweedieLogpdf);

void BM_ProposedResiduals(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p0(n), cdf(n);
  for (std::size_t i = 0; i < n; ++i) {
    p0[i] = 0.01 + 0.98 * u(eng);
    cdf[i] = p0[i] + (1.0 - p0[i]) * u(eng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(residuals::proposed_residuals(p0, cdf));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProposedResiduals)->Arg(1000)->Arg(30000)->Complexity();

void BM_FitTwoPartGamma(benchmark::State& state) {
  const Dataset d = sim::gen_two_part_gamma(2000, -1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(models::fit_model(models::ModelFamily::twopart_gamma, d));
}
BENCHMARK(BM_FitTwoPartGamma)->Unit(benchmark::kMillisecond);

void BM_FitTobit(benchmark::State& state) {
  const Dataset d = sim::gen_tobit(2000, 0.6, 1.0, 5).data;
  for (auto _ : state) benchmark::DoNotOptimize(models::fit_model(models::ModelFamily::tobit, d));
}
BENCHMARK(BM_FitTobit)->Unit(benchmark::kMillisecond);

void BM_FitTweedie(benchmark::State& state) {
  const Dataset d = sim::gen_two_part_gamma(500, -1.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(models::fit_model(models::ModelFamily::tweedie, d));
}
BENCHMARK(BM_FitTweedie)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
