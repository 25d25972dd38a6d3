#include <benchmark/benchmark.h>

#include <cmath>

#include "blowup/decomposition.hpp"
#include "blowup/feynman_kac.hpp"
#include "blowup/heat_solver.hpp"
#include "blowup/parameter_dynamics.hpp"
#include "blowup/profiles.hpp"

using namespace blowup;

static void BM_StepImex(benchmark::State& st) {
    const Grid g(20.0, static_cast<std::size_t>(st.range(0)));
    Field u = Field::sample(g, [](double x) { return std::exp(-x * x); }, Parity::even);
    for (auto _ : st) benchmark::DoNotOptimize(step_imex(u, 1e-3, 3.0));
}
BENCHMARK(BM_StepImex)->Arg(501)->Arg(2001)->Arg(8001);

static void BM_StepRescaled(benchmark::State& st) {
    const Grid g(100.0, static_cast<std::size_t>(st.range(0)));
    const Field v = profile(ProfileKind::V_ab, ProfileParams::from_a(0.45, 0.05), 3.0, g);
    for (auto _ : st) benchmark::DoNotOptimize(step_rescaled(v, 0.01, 0.45, 3.0));
}
BENCHMARK(BM_StepRescaled)->Arg(1001)->Arg(5001);

static void BM_SolveG(benchmark::State& st) {
    const Grid g(100.0, 5001);
    const ProfileParams pp = ProfileParams::from_a(0.45, 0.05);
    const Field v = profile(ProfileKind::V_ab, pp, 3.0, g) +
                    Field::sample(g, [](double y) { return 0.0025 * std::cos(y) * std::exp(-y * y / 8.0); }, Parity::even);
    for (auto _ : st) benchmark::DoNotOptimize(solve_g(v, 3.0, pp.a + 0.01, pp.b));
}
BENCHMARK(BM_SolveG);

static void BM_ExtrapolatedEigenvalues(benchmark::State& st) {
    OperatorParams op;
    op.prof = ProfileParams::from_a(0.5, 0.05);
    const auto m = assemble(OperatorKind::L_abc, op, Grid(20.0, static_cast<std::size_t>(st.range(0))));
    for (auto _ : st) benchmark::DoNotOptimize(extrapolated_eigenvalues(m, 8));
}
BENCHMARK(BM_ExtrapolatedEigenvalues)->Arg(1001)->Arg(2001);

static void BM_BridgeTransform(benchmark::State& st) {
    const std::size_t n = static_cast<std::size_t>(st.range(0));
    const BridgeSampler s(0.5, 0.0, 1.0, n);
    std::vector<double> z(n - 1, 0.3), out(n + 1);
    for (auto _ : st) {
        s.transform(z, out);
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_BridgeTransform)->Arg(64)->Arg(256);

static void BM_FKKernel(benchmark::State& st) {
    const std::vector<KernelPoint> pts{{0.0, 0.0}, {0.5, -0.5}, {1.0, 1.0}};
    const Potential V = [](double y, double) { return profile_potential(y, 3.0, 0.5, 0.05); };
    for (auto _ : st)
        benchmark::DoNotOptimize(fk_kernel_estimate(V, 0.5, 0.0, 1.0, pts, static_cast<std::size_t>(st.range(0)), 42));
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_FKKernel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_TruncatedSystem(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(integrate_truncated({0.0, 0.05, 0.475}, 100.0));
}
BENCHMARK(BM_TruncatedSystem);

BENCHMARK_MAIN();
