// Microbenchmarks for the hot paths: assembly, the two linear solves inside
// one time step, and the perturbed operator's forward/adjoint sweeps.
#include <benchmark/benchmark.h>

#include "chemid/forward.hpp"
#include "chemid/inverse.hpp"

using namespace chemid;

namespace {

PiecewiseLinear1D logistic(int n) {
    return sample_function(n, [](double r) { return r * (1.0 - r); });
}

PiecewiseLinear1D identity_param(int n) {
    return sample_function(n, [](double r) { return r; });
}

void bm_assemble_stiffness(benchmark::State& state) {
    const TriMesh mesh = build_disk_mesh(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        SparseOperator k = assemble_stiffness(mesh);
        benchmark::DoNotOptimize(k);
    }
    state.SetLabel(std::to_string(mesh.n_vertices()) + " vertices");
}

void bm_elliptic_solve(benchmark::State& state) {
    const TriMesh mesh = build_disk_mesh(static_cast<int>(state.range(0)));
    ModelConfig cfg;
    const PiecewiseLinear1D g = identity_param(1000);
    const NodalField rho = initial_density(mesh);
    for (auto _ : state) {
        NodalField c = elliptic_solve(mesh, cfg, g, rho);
        benchmark::DoNotOptimize(c);
    }
}

void bm_parabolic_step(benchmark::State& state) {
    const TriMesh mesh = build_disk_mesh(static_cast<int>(state.range(0)));
    ModelConfig cfg;
    cfg.dt = 0.05;
    const PiecewiseLinear1D f = logistic(1000);
    const PiecewiseLinear1D g = identity_param(1000);
    const NodalField rho = initial_density(mesh);
    const NodalField c = elliptic_solve(mesh, cfg, g, rho);
    for (auto _ : state) {
        NodalField next = parabolic_step(mesh, cfg, f, rho, c);
        benchmark::DoNotOptimize(next);
    }
}

void bm_operator_apply(benchmark::State& state) {
    const TriMesh mesh = build_disk_mesh(static_cast<int>(state.range(0)));
    ModelConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    const PiecewiseLinear1D f = logistic(200);
    const PiecewiseLinear1D g = identity_param(200);
    const NodalField rho0 = initial_density(mesh);
    const SimulationResult sim = simulate(mesh, cfg, f, g, rho0);
    const AffineOperator op(mesh, cfg, g, rho0, sim.rho, 200);
    for (auto _ : state) {
        TimeSeriesField y = op.apply_linear(f);
        benchmark::DoNotOptimize(y);
    }
}

void bm_operator_adjoint(benchmark::State& state) {
    const TriMesh mesh = build_disk_mesh(static_cast<int>(state.range(0)));
    ModelConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    const PiecewiseLinear1D f = logistic(200);
    const PiecewiseLinear1D g = identity_param(200);
    const NodalField rho0 = initial_density(mesh);
    const SimulationResult sim = simulate(mesh, cfg, f, g, rho0);
    const AffineOperator op(mesh, cfg, g, rho0, sim.rho, 200);
    const TimeSeriesField y = op.apply_linear(f);
    for (auto _ : state) {
        PiecewiseLinear1D grad = op.apply_adjoint(y);
        benchmark::DoNotOptimize(grad);
    }
}

BENCHMARK(bm_assemble_stiffness)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_elliptic_solve)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_parabolic_step)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_operator_apply)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_operator_adjoint)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
