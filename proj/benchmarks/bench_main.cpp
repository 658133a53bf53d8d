// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

// Microbenchmarks for the streaming kernels, the planner and one full
// inference. Reusing the test generators keeps inputs identical to the
// property tests.

#include <benchmark/benchmark.h>

#include "qnet/kernel/stream_ops.hpp"
#include "qnet/runtime/runtime.hpp"
#include "qnet/soc/compiler.hpp"
#include "qnet/soc/structure.hpp"
#include "support/generators.hpp"
#include "support/models.hpp"

namespace {

using namespace qnet;
using testing::ConvShape;

kernel::Driver driver_arg(const benchmark::State& state) {
    return state.range(0) != 0 ? kernel::Driver::Threaded : kernel::Driver::RoundRobin;
}

void BM_StreamDepthwise(benchmark::State& state) {
    Rng rng(1);
    const int c = 32, hw = 28;
    const auto spec = testing::random_activation_spec(rng, 4);
    const auto layer = testing::random_qconv(rng, {ir::LayerKind::DepthwiseConv, c, c, 3, 1, c}, spec, 4, 4, true,
                                             "dw");
    const auto input = testing::random_codes(rng, {c, hw, hw}, spec);
    kernel::StreamOptions opts;
    opts.driver = driver_arg(state);
    for (auto _ : state) {
        const auto run = kernel::stream_conv_dw(layer, input, opts);
        benchmark::DoNotOptimize(run.output.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c) * hw * hw * 9);
}
BENCHMARK(BM_StreamDepthwise)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_StreamPointwise(benchmark::State& state) {
    Rng rng(2);
    const int n = 64, m = 64, hw = 14;
    const auto spec = testing::random_activation_spec(rng, 4);
    const auto layer = testing::random_qconv(rng, {ir::LayerKind::PointwiseConv, n, m, 1, 1, 1}, spec, 4, 4, false,
                                             "pw");
    const auto input = testing::random_codes(rng, {n, hw, hw}, spec);
    kernel::StreamOptions opts;
    opts.lanes = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto run = kernel::stream_conv_pw(layer, input, opts);
        benchmark::DoNotOptimize(run.output.data().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * m * hw * hw);
}
BENCHMARK(BM_StreamPointwise)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CompileMobileNet(benchmark::State& state) {
    const auto input = soc::plan_input(ir::load_model(testing::model_path("mobilenet_v2_a050.json")));
    for (auto _ : state) {
        const auto plan = soc::compile_plan(input, soc::xczu9eg());
        const auto schedule = soc::emit_schedule(plan);
        benchmark::DoNotOptimize(schedule.total_bytes);
    }
}
BENCHMARK(BM_CompileMobileNet)->Unit(benchmark::kMillisecond);

void BM_InferToy(benchmark::State& state) {
    auto d = testing::deploy(testing::toy_qnet(3, true, 3, 32));
    runtime::Runtime rt(d.model, d.plan, d.schedule);
    Rng rng(4);
    const auto& m = d.model;
    const auto input = testing::random_codes(rng, {m.input_channels, m.input_resolution, m.input_resolution},
                                             m.input_spec);
    runtime::InferenceOptions opts;
    opts.driver = driver_arg(state);
    for (auto _ : state) {
        const auto r = rt.infer(input, opts);
        benchmark::DoNotOptimize(r.output.data().data());
    }
}
BENCHMARK(BM_InferToy)->Arg(0)->Arg(1)->UseRealTime()->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
