#include <benchmark/benchmark.h>

#include "htfkit/frames.hpp"
#include "htfkit/simulator.hpp"
#include "htfkit/stability.hpp"
#include "htfkit/vsi.hpp"

using namespace htfkit;

namespace {

void bm_htf_evaluate(benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    LtpStateSpace model = build_vsi_hss(VsiParams{});
    const Complex s = jj * 0.31;
    for (auto _ : state) {
        HtfSlice slice = htf_evaluate(model, s, h);
        benchmark::DoNotOptimize(slice.matrix().data());
    }
}
BENCHMARK(bm_htf_evaluate)->Arg(3)->Arg(6)->Arg(10)->Arg(15);

void bm_similarity(benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    VsiParams params;
    LtpStateSpace model = build_vsi_hss(params);
    HtfSlice slice = htf_evaluate(model, jj * 0.31, h);
    FrameTransform tr = FrameTransform::rotation(params.pump_pu());
    for (auto _ : state) {
        HtfSlice out = similarity(slice, tr);
        benchmark::DoNotOptimize(out.matrix().data());
    }
}
BENCHMARK(bm_similarity)->Arg(3)->Arg(6)->Arg(10);

void bm_closed_form_grid(benchmark::State& state) {
    ZtClosedForm zt = z_closed_form(VsiParams{});
    const std::vector<double> grid = default_grid_hz();
    for (auto _ : state) {
        CMatrix2 acc = CMatrix2::Zero();
        for (double f : grid)
            acc += zt.admittance_2x2(jj * (2.0 * pi * f / zt.omega_base));
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(bm_closed_form_grid);

void bm_phase_margin(benchmark::State& state) {
    LoopDecomposition loops = decompose_loops(z_closed_form(VsiParams{}));
    const std::vector<double> grid = default_grid_hz();
    for (auto _ : state) {
        PhaseMarginResult r = phase_margin(loops.symmetric_minus, grid, loops.omega_base);
        benchmark::DoNotOptimize(r.worst_margin_deg);
    }
}
BENCHMARK(bm_phase_margin);

void bm_vsi_integration(benchmark::State& state) {
    VsiParams params;
    VsiNonlinear sys(params);
    SimConfig cfg = SimConfig::for_period(params.pump_period_pu(), 5.0, 0.0);
    for (auto _ : state) {
        Trajectory traj = integrate_vsi(sys, sys.equilibrium(0.0), cfg);
        benchmark::DoNotOptimize(traj.state.back());
    }
}
BENCHMARK(bm_vsi_integration);

} // namespace

BENCHMARK_MAIN();
