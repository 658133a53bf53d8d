// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. A criterion also
// fails when it exceeds its wall-time limit. Exit status is nonzero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qnet/frontend/bn_fusion.hpp"
#include "qnet/frontend/quant.hpp"
#include "qnet/ir/counting.hpp"
#include "qnet/ir/manifest.hpp"
#include "qnet/runtime/perf.hpp"
#include "qnet/runtime/trace.hpp"
#include "qnet/soc/schedule.hpp"
#include "support/float_oracle.hpp"
#include "support/models.hpp"
#include "support/stream_cases.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

constexpr double kAlphas[] = {1.0, 0.75, 0.5, 0.35};
constexpr int kResolutions[] = {224, 192, 160, 128, 96};
const char* const kMobileNetFiles[] = {"mobilenet_v2_a100.json", "mobilenet_v2_a075.json",
                                       "mobilenet_v2_a050.json", "mobilenet_v2_a035.json"};

// Published MobileNet-V2 design-space figures at BW 4 (first conv at 8).
constexpr double kParamsMb[] = {13.31, 10.01, 7.48, 6.37};
constexpr double kOpsM[4][5] = {{313.621, 230.755, 160.638, 103.269, 58.649},
                                {220.326, 162.212, 113.038, 72.805, 41.513},
                                {104.164, 76.868, 53.772, 34.875, 20.177},
                                {64.835, 47.973, 33.706, 22.033, 12.953}};

Outcome design_space_counts() {
    double worst_params = 0.0, worst_ops = 0.0;
    bool constant = true;
    for (int a = 0; a < 4; ++a) {
        const auto graph = ir::load_model(model_path(kMobileNetFiles[a]));
        const auto bw = ir::BitWidthMap::standard(graph, 4, 8);
        const double mb = static_cast<double>(ir::count_params_bits(graph, bw)) / ir::kBitsPerMb;
        worst_params = std::max(worst_params, std::abs(mb - kParamsMb[a]) / kParamsMb[a]);
        for (int h = 0; h < 5; ++h) {
            const double ops = static_cast<double>(ir::count_ops(graph, kResolutions[h])) / 1e6;
            worst_ops = std::max(worst_ops, std::abs(ops - kOpsM[a][h]) / kOpsM[a][h]);
            auto scaled = graph;
            scaled.input_resolution = kResolutions[h];
            constant = constant && ir::count_params_bits(scaled, bw) == ir::count_params_bits(graph, bw);
        }
    }
    std::ostringstream s;
    s << "max params error " << worst_params * 100 << "%, max ops error " << worst_ops * 100
      << "%, params constant across H: " << (constant ? "yes" : "no");
    return {worst_params <= 0.05 && worst_ops <= 0.10 && constant, s.str()};
}

Outcome cu_mapping() {
    const auto mnv2 = soc::partition_to_cus(soc::plan_input(ir::load_model(model_path("mobilenet_v2_a100.json"))));
    const auto eff = soc::partition_to_cus(soc::plan_input(ir::load_model(model_path("efficientnet.json"))));
    const int mb = mnv2.invocation_count(soc::CuKind::Body), eb = eff.invocation_count(soc::CuKind::Body);
    const int fused = eff.cu(soc::CuKind::Body).fused_operator_count();
    std::ostringstream s;
    s << "MobileNet-V2 Body x" << mb << ", EfficientNet Body x" << eb << " with " << fused << " fused operators";
    return {mb == 16 && eb == 9 && fused == 6, s.str()};
}

Outcome streaming_kernels() {
    constexpr int kCases = 1000;
    std::ostringstream s;
    bool ok = true;
    for (StreamKind kind : kAllStreamKinds) {
        const auto sum = run_stream_cases(kind, kCases, 2026);
        ok = ok && sum.failures == 0 && sum.cases == kCases;
        s << stream_kind_name(kind) << " " << sum.cases - sum.failures << "/" << sum.cases << " ";
        if (sum.failures)
            s << "[" << sum.first_failure << "] ";
    }
    return {ok, s.str() + "(pointwise cases include lane-count invariance)"};
}

Outcome bn_fusion() {
    constexpr int kCases = 500;
    Rng rng(404);
    double worst = 0.0;
    for (int i = 0; i < kCases; ++i) {
        ConvShape shape;
        switch (between(rng, 0, 3)) {
        case 0: {
            const int c = between(rng, 1, 12);
            shape = {ir::LayerKind::DepthwiseConv, c, c, pick(rng, {3, 5}), pick(rng, {1, 2}), c};
            break;
        }
        case 1: shape = {ir::LayerKind::PointwiseConv, between(rng, 1, 12), between(rng, 1, 12), 1, 1, 1}; break;
        case 2: {
            const int g = pick(rng, {2, 3});
            shape = {ir::LayerKind::NormalConv, g * between(rng, 1, 4), g * between(rng, 1, 4), pick(rng, {1, 3}),
                     pick(rng, {1, 2}), g};
            break;
        }
        default:
            shape = {ir::LayerKind::NormalConv, between(rng, 1, 8), between(rng, 1, 12), pick(rng, {1, 3, 5}),
                     pick(rng, {1, 2}), 1};
        }
        const auto conv = random_float_conv(rng, shape);
        const auto bn = random_batch_norm(rng, shape.m);
        const int res = between(rng, 1, 10);
        const auto x = random_floats(rng, {shape.n, res, res});
        const auto want = oracle_batch_norm(bn, oracle_float_conv(conv, x));
        const auto got = oracle_float_conv(frontend::fuse_batch_norm(conv, bn), x);
        for (std::size_t j = 0; j < want.size(); ++j)
            worst = std::max(worst, static_cast<double>(std::abs(want[j] - got[j])));
    }
    std::ostringstream s;
    s << kCases << " conv+BN compositions, max elementwise error " << worst;
    return {worst <= 1e-4, s.str()};
}

Outcome quantization_bounds() {
    Rng rng(77);
    bool ok = true;
    double worst_ratio = 0.0;
    long sweeps = 0;
    for (int bw : {3, 4, 6, 8}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double lo = trial == 0 ? 0.0 : -rng.uniform(0.0, 10.0);
            const double hi = rng.uniform(0.01, 10.0);
            const auto spec = frontend::make_quant_spec(lo, hi, bw);
            const double scale = spec.scale_at(0);
            const std::int32_t zero = spec.zero_at(0);
            const std::int32_t top = (1 << bw) - 1;
            ok = ok && frontend::quantize_value(lo, scale, zero, spec.qmin(), spec.qmax()) == 0;
            ok = ok && frontend::quantize_value(hi, scale, zero, spec.qmin(), spec.qmax()) == top;
            // Every code decodes and re-encodes to itself.
            for (std::int32_t q = spec.qmin(); q <= spec.qmax(); ++q)
                ok = ok && frontend::quantize_value(frontend::dequantize_value(q, scale, zero), scale, zero,
                                                    spec.qmin(), spec.qmax()) == q;
            // Dense sweep of the representable range.
            constexpr int kSteps = 4096;
            for (int i = 0; i <= kSteps; ++i) {
                const double x = lo + (hi - lo) * i / kSteps;
                const auto q = frontend::quantize_value(x, scale, zero, spec.qmin(), spec.qmax());
                const double err = std::abs(frontend::dequantize_value(q, scale, zero) - x);
                const double slack = 1e-9 * std::max(1.0, std::abs(x));
                ok = ok && err <= scale / 2 + slack;
                worst_ratio = std::max(worst_ratio, err / scale);
                ++sweeps;
            }
        }
    }
    std::ostringstream s;
    s << sweeps << " sweep points over BW {3,4,6,8}, worst error " << worst_ratio
      << " S, asymmetric endpoints exact";
    return {ok, s.str()};
}

Outcome end_to_end() {
    constexpr int kInputs = 20;
    struct Net {
        const char* name;
        ir::NetworkGraph graph;
    };
    const Net nets[] = {{"MobileNet-V2 a0.5 H96", ir::zoo::mobilenet_v2(0.5, {96, true, 31})},
                        {"EfficientNet H128", ir::zoo::efficientnet_compressed({128, true, 32})}};
    std::ostringstream s;
    bool ok = true;
    for (const auto& net : nets) {
        const auto d = deploy(quantize_graph(net.graph, 2, 5));
        runtime::Runtime rt(d.model, d.plan, d.schedule);
        Rng rng(99);
        int exact = 0;
        for (int i = 0; i < kInputs; ++i) {
            const auto x = runtime::quantize_input(d.model, random_image(rng, 3, net.graph.input_resolution));
            runtime::InferenceOptions opts;
            opts.driver = i % 4 == 3 ? kernel::Driver::Threaded : kernel::Driver::RoundRobin;
            const auto r = rt.infer(x, opts);
            exact += r.output == runtime::run_oracle(d.model, x) ? 1 : 0;
        }
        ok = ok && exact == kInputs;
        s << (s.tellp() > 0 ? "; " : "") << net.name << " " << exact << "/" << kInputs << " bit-exact";
    }
    return {ok, s.str()};
}

Outcome trends() {
    std::vector<std::vector<double>> fps(4, std::vector<double>(5));
    std::vector<std::int64_t> dsp(4);
    std::vector<bool> feasible(4);
    for (int a = 0; a < 4; ++a) {
        const auto graph = ir::load_model(model_path(kMobileNetFiles[a]));
        for (int h = 0; h < 5; ++h) {
            const auto plan = soc::compile_plan(soc::plan_input(graph, 4, 8, 8, kResolutions[h]), soc::xczu9eg());
            fps[a][h] = runtime::estimate_performance(plan, soc::emit_schedule(plan)).fps;
            if (h == 0) {
                dsp[a] = plan.resources.dsp;
                feasible[a] = plan.resources.feasible;
            }
        }
    }
    bool by_h = true, by_alpha = true;
    for (int a = 0; a < 4; ++a)
        for (int h = 0; h + 1 < 5; ++h)
            by_h = by_h && fps[a][h + 1] > fps[a][h];
    for (int h = 0; h < 5; ++h)
        for (int a = 0; a + 1 < 4; ++a)
            by_alpha = by_alpha && fps[a + 1][h] > fps[a][h];
    const bool dsp_order = dsp[3] < dsp[2] && dsp[2] < dsp[1] && dsp[1] < dsp[0];
    std::ostringstream s;
    s << "FPS rises as H falls: " << (by_h ? "yes" : "no") << ", as alpha falls: " << (by_alpha ? "yes" : "no")
      << "; DSP 0.35/0.5/0.75/1 = " << dsp[3] << "/" << dsp[2] << "/" << dsp[1] << "/" << dsp[0]
      << "; alpha 1 flagged infeasible: " << (feasible[0] ? "no" : "yes");
    return {by_h && by_alpha && dsp_order && !feasible[0], s.str()};
}

Outcome fusion_benefit() {
    const char* files[] = {"mobilenet_v2_a100.json", "efficientnet.json"};
    std::ostringstream s;
    bool ok = true;
    for (const char* f : files) {
        const auto plan = soc::compile_plan(soc::plan_input(ir::load_model(model_path(f))), soc::xczu9eg());
        const auto fused = runtime::trace_transactions(plan, soc::emit_schedule(plan));
        const auto unfused = runtime::unfused_trace(plan);
        int below = 0, bodies = 0;
        double worst = 0.0;
        for (const auto& inv : plan.invocations) {
            if (inv.cu != soc::CuKind::Body)
                continue;
            ++bodies;
            const auto a = fused.stream_bytes(inv.index), b = unfused.stream_bytes(inv.index);
            below += a < b ? 1 : 0;
            worst = std::max(worst, static_cast<double>(a) / static_cast<double>(b));
        }
        ok = ok && bodies > 0 && below == bodies;
        s << (s.tellp() > 0 ? "; " : "") << f << " " << below << "/" << bodies
          << " Body invocations below unfused (max ratio " << worst << ")";
    }
    return {ok, s.str()};
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const Criterion criteria[] = {
        {1, "design-space parameter and op counts", 1.0, design_space_counts},
        {2, "compute-unit mapping", 1.0, cu_mapping},
        {3, "streaming kernels vs naive oracles", 120.0, streaming_kernels},
        {4, "batch-norm folding", 30.0, bn_fusion},
        {5, "quantization bounds", 30.0, quantization_bounds},
        {6, "end-to-end bit-exactness", 300.0, end_to_end},
        {7, "performance and resource trends", 10.0, trends},
        {8, "fused vs unfused stream traffic", 5.0, fusion_benefit},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s [%d] %s: %s (%.2fs, limit %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.limit_s, in_time ? "" : ", exceeded");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
