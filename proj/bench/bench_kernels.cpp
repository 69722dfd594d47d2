// bench_kernels.cpp — serial reference kernels against the production kernels.

#include "duffing/bath.hpp"
#include "duffing/kernels.hpp"
#include "duffing/operators.hpp"
#include "duffing/propagator.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace duffing;

struct Fixture {
    OscillatorParams params;
    OperatorTable ops;
    DissipatorTable diss;
    ComplexMatrix rho;

    explicit Fixture(int n) {
        params.n_basis = n;
        params.f0 = 0.05;
        params.theta = 0.3;
        ops = build_operator_table(params);
        diss = build_dissipator(ops, bath_spec(params));
        rho = coherent_state_at(n, 2.0, 0.5).rho;
    }
};

void BM_RhsReference(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::master_rhs_reference(f.ops, f.diss, 0.03, f.rho));
}

void BM_RhsEigen(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    const kernels::EigenLiouvillian L(f.ops, f.diss);
    const kernels::SplitMatrix rho(f.ops.to_eigen(f.rho));
    kernels::SplitMatrix out(f.ops.dim);
    for (auto _ : state) {
        L.apply(0.03, rho, out);
        benchmark::DoNotOptimize(out.re.data());
    }
}

void BM_WignerReference(benchmark::State& state) {
    Fixture f(40);
    const int pts = static_cast<int>(state.range(0));
    std::vector<double> xs(pts), out(static_cast<std::size_t>(pts) * pts);
    for (int i = 0; i < pts; ++i) xs[i] = -8.0 + 16.0 * i / (pts - 1);
    for (auto _ : state) {
        kernels::wigner_grid_reference(f.rho, xs, xs, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_WignerParallel(benchmark::State& state) {
    Fixture f(40);
    const int pts = static_cast<int>(state.range(0));
    std::vector<double> xs(pts), out(static_cast<std::size_t>(pts) * pts);
    for (int i = 0; i < pts; ++i) xs[i] = -8.0 + 16.0 * i / (pts - 1);
    for (auto _ : state) {
        kernels::wigner_grid(f.rho, xs, xs, out);
        benchmark::DoNotOptimize(out.data());
    }
}

} // namespace

BENCHMARK(BM_RhsReference)->Arg(40)->Arg(60)->Arg(100);
BENCHMARK(BM_RhsEigen)->Arg(40)->Arg(60)->Arg(100);
BENCHMARK(BM_WignerReference)->Arg(51)->Arg(101);
BENCHMARK(BM_WignerParallel)->Arg(51)->Arg(101);
BENCHMARK_MAIN();
