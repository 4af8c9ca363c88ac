// OpenMP kernels against the serial reference implementations.
#include <benchmark/benchmark.h>

#include "fracpq/eigensolvers.hpp"
#include "fracpq/forms.hpp"

namespace {

using namespace fracpq;

void BM_build_kernel(benchmark::State& state) {
  const Grid g = build_grid(-1.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_kernel(g, 0.6, 3.0));
}

void BM_build_kernel_reference(benchmark::State& state) {
  const Grid g = build_grid(-1.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::build_kernel(g, 0.6, 3.0));
}

template <typename F>
void run_form(benchmark::State& state, double r, F&& f) {
  const int n = static_cast<int>(state.range(0));
  const Grid g = build_grid(-1.0, 1.0, n);
  const NonlocalKernel k = build_kernel(g, 0.6, r);
  const Field u = random_positive_field(n, 1) - Field::Constant(n, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(f(u, k));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n);
}

void BM_seminorm(benchmark::State& s) {
  run_form(s, 3.0, [](const Field& u, const NonlocalKernel& k) { return seminorm_pow(u, k); });
}
void BM_seminorm_reference(benchmark::State& s) {
  run_form(s, 3.0, [](const Field& u, const NonlocalKernel& k) { return reference::seminorm_pow(u, k); });
}
void BM_apply(benchmark::State& s) {
  run_form(s, 3.0, [](const Field& u, const NonlocalKernel& k) { return apply_frac_laplacian(u, k); });
}
void BM_apply_reference(benchmark::State& s) {
  run_form(s, 3.0, [](const Field& u, const NonlocalKernel& k) { return reference::apply_frac_laplacian(u, k); });
}
void BM_apply_r2(benchmark::State& s) {
  run_form(s, 2.0, [](const Field& u, const NonlocalKernel& k) { return apply_frac_laplacian(u, k); });
}
void BM_apply_r2_reference(benchmark::State& s) {
  run_form(s, 2.0, [](const Field& u, const NonlocalKernel& k) { return reference::apply_frac_laplacian(u, k); });
}

}  // namespace

BENCHMARK(BM_build_kernel)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_build_kernel_reference)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_seminorm)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_seminorm_reference)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_apply)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_apply_reference)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_apply_r2)->RangeMultiplier(2)->Range(128, 1024);
BENCHMARK(BM_apply_r2_reference)->RangeMultiplier(2)->Range(128, 1024);

BENCHMARK_MAIN();
