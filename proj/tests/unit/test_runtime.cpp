// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "qnet/error.hpp"
#include "qnet/runtime/memory.hpp"
#include "qnet/runtime/oracle.hpp"
#include "qnet/runtime/perf.hpp"
#include "qnet/runtime/runtime.hpp"
#include "qnet/runtime/trace.hpp"
#include "support/models.hpp"

using namespace qnet;
using namespace qnet::runtime;
using qnet::testing::between;
using qnet::testing::deploy;
using qnet::testing::model_path;
using qnet::testing::random_codes;
using qnet::testing::toy_qnet;

namespace {

ir::IntTensor random_input(Rng& rng, const frontend::QNetModel& m) {
    return random_codes(rng, {m.input_channels, m.input_resolution, m.input_resolution}, m.input_spec);
}

soc::HardwarePlan shape_plan(const std::string& file, int resolution, const soc::CompileOptions& opts = {}) {
    return soc::compile_plan(soc::plan_input(ir::load_model(model_path(file)), 4, 8, 8, resolution), soc::xczu9eg(),
                             opts);
}

std::uint64_t role_bytes(const TransactionTrace& t, int invocation, TensorRole role) {
    std::uint64_t sum = 0;
    for (const auto& x : t.transactions)
        if (x.invocation == invocation && x.role == role)
            sum += x.bytes;
    return sum;
}

std::uint64_t role_bytes(const TransactionTrace& t, TensorRole role) {
    std::uint64_t sum = 0;
    for (const auto& x : t.transactions)
        if (x.role == role)
            sum += x.bytes;
    return sum;
}

// Stream trace values grouped by channel id, ticks dropped. Invocations run
// one after another, so each group lists its values invocation by invocation
// and does not depend on the driver.
std::map<std::string, std::vector<std::string>> per_channel(const std::string& trace) {
    std::map<std::string, std::vector<std::string>> out;
    std::istringstream in(trace);
    std::string tick, channel, value;
    while (in >> tick >> channel >> value)
        out[channel].push_back(value);
    return out;
}

} // namespace

TEST_CASE("fused execution equals the monolithic oracle on random toy networks") {
    Rng rng(404);
    for (int trial = 0; trial < 12; ++trial) {
        const bool se = trial % 2 == 1;
        const int irbs = between(rng, 1, 3);
        soc::CompileOptions opts;
        if (trial % 3 == 0)
            opts.residual_budget_bits = 0; // forces the off-chip residual path
        auto d = deploy(toy_qnet(1000 + static_cast<std::uint64_t>(trial), se, irbs), opts);
        Runtime rt(d.model, d.plan, d.schedule);
        for (int i = 0; i < 10; ++i) {
            const auto input = random_input(rng, d.model);
            const auto result = rt.infer(input);
            CAPTURE(trial);
            CAPTURE(i);
            CHECK(result.output == run_oracle(d.model, input));
            CHECK(result.trace == trace_transactions(d.plan, d.schedule));
        }
    }
}

TEST_CASE("zero input matches the oracle") {
    auto d = deploy(toy_qnet(77, true, 2));
    Runtime rt(d.model, d.plan, d.schedule);
    const auto& m = d.model;
    const ir::IntTensor zero({m.input_channels, m.input_resolution, m.input_resolution}, m.input_spec.zero_point.at(0));
    CHECK(rt.infer(zero).output == run_oracle(m, zero));
}

TEST_CASE("classifier result carries argmax and normalized confidences") {
    auto d = deploy(toy_qnet(81));
    REQUIRE(d.model.has_classifier());
    Runtime rt(d.model, d.plan, d.schedule);
    Rng rng(3);
    const auto r = rt.infer(random_input(rng, d.model));
    REQUIRE(r.logits.size() == r.output.size());
    CHECK(r.argmax == std::distance(r.logits.begin(), std::max_element(r.logits.begin(), r.logits.end())));
    const auto codes = r.output.storage();
    CHECK(r.argmax == std::distance(codes.begin(), std::max_element(codes.begin(), codes.end())));
    CHECK(std::accumulate(r.confidences.begin(), r.confidences.end(), 0.0) == doctest::Approx(1.0));
    CHECK(r.invocations.size() == d.schedule.invocations.size());
}

TEST_CASE("MobileNet-V2 a0.5 at 96x96 agrees with the oracle") {
    auto d = deploy(qnet::testing::quantize_graph(ir::zoo::mobilenet_v2(0.5, {96, true, 9}), 2, 10));
    Runtime rt(d.model, d.plan, d.schedule);
    Rng rng(12);
    const auto input = random_input(rng, d.model);
    const auto r = rt.infer(input);
    const auto oracle = run_oracle(d.model, input);
    CHECK(r.output == oracle);
    const auto& o = oracle.storage();
    CHECK(r.argmax == std::distance(o.begin(), std::max_element(o.begin(), o.end())));
}

TEST_CASE("results and traces are identical across drivers and FIFO depths") {
    auto d = deploy(toy_qnet(91, true, 3));
    Runtime rt(d.model, d.plan, d.schedule);
    Rng rng(8);
    const auto input = random_input(rng, d.model);
    std::ostringstream ref_stream;
    InferenceOptions base;
    base.stream_trace = &ref_stream;
    const auto ref = rt.infer(input, base);
    const std::size_t depths[] = {0, 1, 7};
    for (auto driver : {kernel::Driver::RoundRobin, kernel::Driver::Threaded})
        for (std::size_t depth : depths) {
            std::ostringstream stream;
            InferenceOptions o;
            o.driver = driver;
            o.fifo_depth = depth;
            o.stream_trace = &stream;
            const auto r = rt.infer(input, o);
            CAPTURE(depth);
            CHECK(r.output == ref.output);
            CHECK(r.trace == ref.trace);
            CHECK(r.perf == ref.perf);
            REQUIRE(r.invocations.size() == ref.invocations.size());
            for (std::size_t i = 0; i < r.invocations.size(); ++i) {
                CHECK(r.invocations[i].macs == ref.invocations[i].macs);
                REQUIRE(r.invocations[i].channels.size() == ref.invocations[i].channels.size());
                for (std::size_t c = 0; c < r.invocations[i].channels.size(); ++c) {
                    CHECK(r.invocations[i].channels[c].pushed == ref.invocations[i].channels[c].pushed);
                    CHECK(r.invocations[i].channels[c].popped == ref.invocations[i].channels[c].popped);
                }
            }
            if (driver == kernel::Driver::RoundRobin && depth == 0)
                CHECK(stream.str() == ref_stream.str());
            CHECK(per_channel(stream.str()) == per_channel(ref_stream.str()));
        }
}

TEST_CASE("repeated inference is reproducible") {
    auto d = deploy(toy_qnet(95, false, 2));
    Runtime rt(d.model, d.plan, d.schedule);
    Rng rng(1);
    const auto input = random_input(rng, d.model);
    const auto a = rt.infer(input);
    const auto b = rt.infer(input);
    CHECK(a.output == b.output);
    CHECK(a.trace == b.trace);
}

TEST_CASE("runtime rejects inputs and plans that do not belong to the model") {
    auto d = deploy(toy_qnet(101, false, 2));
    auto other = deploy(toy_qnet(102, true, 3));
    CHECK_THROWS_AS(Runtime(d.model, other.plan, other.schedule), PlanError);
    CHECK_THROWS_AS(Runtime(d.model, d.plan, other.schedule), PlanError);
    Runtime rt(d.model, d.plan, d.schedule);
    CHECK_THROWS_AS(rt.infer(ir::IntTensor({1, 2, 2}, 0)), ShapeError);
}

TEST_CASE("shared memory image enforces regions, initialization and sealing") {
    auto d = deploy(toy_qnet(111));
    SharedMemoryImage img(d.schedule);
    CHECK(img.size() == d.schedule.total_bytes);
    const int in = d.schedule.input_region;
    std::uint8_t byte[1] = {0};
    CHECK_THROWS_AS(img.read(in, 0, byte), MemoryError);
    const std::uint8_t payload[2] = {1, 2};
    img.write(in, 0, payload);
    std::uint8_t back[2] = {};
    img.read(in, 0, back);
    CHECK(back[0] == 1);
    CHECK(back[1] == 2);
    const auto& region = img.region(in);
    CHECK_THROWS_AS(img.write(in, region.bytes - 1, payload), MemoryError);
    CHECK_THROWS_AS(img.read(static_cast<int>(d.schedule.regions.size()), 0, byte), MemoryError);
    img.invalidate(in);
    CHECK_THROWS_AS(img.read(in, 0, byte), MemoryError);

    initialize_parameters(img, d.model, d.plan, d.schedule);
    img.seal_parameters();
    const int weights = d.schedule.invocations[0].weights_region;
    REQUIRE(weights >= 0);
    CHECK_NOTHROW(img.read(weights, 0, byte));
    CHECK_THROWS_AS(img.write(weights, 0, payload), MemoryError);
}

TEST_CASE("packed codes round-trip at every supported width") {
    auto d = deploy(toy_qnet(121));
    SharedMemoryImage img(d.schedule);
    const int r = d.schedule.input_region;
    Rng rng(4);
    for (int bw : {1, 4, 5, 8, 16, 32}) {
        const std::uint64_t count = std::min<std::uint64_t>(img.region(r).bytes * 8 / static_cast<std::uint64_t>(bw), 64);
        for (bool is_signed : {false, true}) {
            std::vector<std::int32_t> values;
            const std::int64_t lo = is_signed ? -(std::int64_t{1} << (bw - 1)) : 0;
            const std::int64_t hi = is_signed ? (std::int64_t{1} << (bw - 1)) - 1 : (std::int64_t{1} << std::min(bw, 31)) - 1;
            for (std::uint64_t i = 0; i < count; ++i) {
                values.push_back(static_cast<std::int32_t>(rng.uniform_int(lo, hi)));
                img.write_code(r, i, bw, values.back());
            }
            for (std::uint64_t i = 0; i < count; ++i)
                CHECK(img.read_code(r, i, bw, is_signed) == values[i]);
        }
    }
    CHECK_THROWS_AS(img.write_code(r, 0, 4, 16), MemoryError);
    CHECK_THROWS_AS(img.write_code(r, 0, 0, 0), MemoryError);
    CHECK_THROWS_AS(img.write_code(r, 0, 33, 0), MemoryError);
}

TEST_CASE("parameters reloaded from memory equal the model layers") {
    auto d = deploy(toy_qnet(131, true, 2));
    SharedMemoryImage img(d.schedule);
    initialize_parameters(img, d.model, d.plan, d.schedule);
    std::vector<const frontend::QLayer*> model_layers;
    for (const auto& b : d.model.blocks)
        for (const auto& l : b.layers)
            model_layers.push_back(&l);
    std::size_t next = 0;
    for (const auto& si : d.schedule.invocations) {
        const auto offsets = param_offsets(d.plan, si.call);
        for (std::size_t i = 0; i < si.call.layers.size(); ++i) {
            const auto& p = si.call.layers[i];
            const auto type = d.plan.cu(si.call.cu).slots.at(static_cast<std::size_t>(p.slot)).type;
            const auto& ref = *model_layers.at(next++);
            const auto loaded = load_layer(img, si, i, offsets[i], type, ref);
            CAPTURE(p.name);
            CHECK(loaded.layer == ref);
            CHECK(loaded.weight_bytes == soc::weight_bytes(p));
            CHECK(loaded.qparam_bytes == soc::qparam_bytes(p, type));
        }
    }
    CHECK(next == model_layers.size());
}

TEST_CASE("burst reads cover exactly the packed parameter bytes") {
    for (const char* f : {"mobilenet_v2_a050.json", "efficientnet.json"}) {
        const auto plan = shape_plan(f, 0);
        const auto sched = soc::emit_schedule(plan);
        const auto trace = trace_transactions(plan, sched);
        for (const auto& inv : plan.invocations) {
            std::uint64_t weights = 0, qparams = 0;
            for (const auto& l : inv.layers) {
                weights += soc::weight_bytes(l);
                qparams += soc::qparam_bytes(l, plan.cu(inv.cu).slots.at(static_cast<std::size_t>(l.slot)).type);
            }
            CHECK(role_bytes(trace, inv.index, TensorRole::Weights) == weights);
            CHECK(role_bytes(trace, inv.index, TensorRole::QuantParams) == qparams);
            CHECK(trace.total(TransferKind::Burst, inv.index) == weights + qparams);
            CHECK(role_bytes(trace, inv.index, TensorRole::Input) ==
                  soc::feature_bytes(inv.in, inv.layers.front().in_bw));
            CHECK(role_bytes(trace, inv.index, TensorRole::Output) ==
                  soc::feature_bytes(inv.out, inv.layers.back().out_bw));
        }
        for (const auto& x : trace.transactions)
            CHECK(x.bytes > 0);
        CHECK(trace.total_bytes() == trace.total(TransferKind::Burst) + trace.total(TransferKind::Stream));
    }
}

TEST_CASE("weight bytes are the packed weight bits of each layer") {
    const auto plan = shape_plan("toy.json", 0);
    for (const auto& inv : plan.invocations)
        for (const auto& l : inv.layers)
            CHECK(soc::weight_bytes(l) == soc::packed_bytes(l.weight_count(), l.weight_bw));
}

TEST_CASE("on-chip residuals never spill and off-chip ones round-trip") {
    const auto on = shape_plan("mobilenet_v2_a050.json", 0);
    REQUIRE(on.cu(soc::CuKind::Body).residual == soc::ResidualPlacement::OnChip);
    CHECK(role_bytes(trace_transactions(on, soc::emit_schedule(on)), TensorRole::ResidualSpill) == 0);

    soc::CompileOptions none;
    none.residual_budget_bits = 0;
    const auto off = shape_plan("mobilenet_v2_a050.json", 0, none);
    const auto trace = trace_transactions(off, soc::emit_schedule(off));
    for (const auto& inv : off.invocations) {
        const auto spill = role_bytes(trace, inv.index, TensorRole::ResidualSpill);
        if (inv.residual)
            CHECK(spill == 2 * soc::spill_bytes(off, inv));
        else
            CHECK(spill == 0);
    }
}

TEST_CASE("fused invocations stream fewer bytes than unfused execution") {
    for (const char* f : {"mobilenet_v2_a035.json", "efficientnet.json", "toy.json"}) {
        const auto plan = shape_plan(f, 0);
        const auto fused = trace_transactions(plan, soc::emit_schedule(plan));
        const auto unfused = unfused_trace(plan);
        for (const auto& inv : plan.invocations) {
            CAPTURE(inv.index);
            if (inv.layers.size() > 1)
                CHECK(fused.stream_bytes(inv.index) < unfused.stream_bytes(inv.index));
            else
                CHECK(fused.stream_bytes(inv.index) == unfused.stream_bytes(inv.index));
            CHECK(fused.total(TransferKind::Burst, inv.index) == unfused.total(TransferKind::Burst, inv.index));
        }
    }
}

TEST_CASE("trace CSV has one row per transaction") {
    const auto plan = shape_plan("toy.json", 0);
    const auto trace = trace_transactions(plan, soc::emit_schedule(plan));
    std::ostringstream out;
    write_trace_csv(out, trace, plan);
    const auto text = out.str();
    CHECK(text.rfind("invocation,cu,kind,direction,role,bytes\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == trace.transactions.size() + 1);
}

TEST_CASE("estimated FPS falls as resolution grows") {
    for (const char* f : {"mobilenet_v2_a035.json", "mobilenet_v2_a050.json", "mobilenet_v2_a075.json"}) {
        double prev = 1e300;
        for (int h : {96, 128, 160, 192, 224}) {
            const auto plan = shape_plan(f, h);
            const auto perf = estimate_performance(plan, soc::emit_schedule(plan));
            CAPTURE(h);
            CHECK(perf.fps < prev);
            prev = perf.fps;
        }
    }
}

TEST_CASE("estimated FPS falls as width grows") {
    for (int h : {96, 160, 224}) {
        double prev = 1e300;
        for (const char* f : {"mobilenet_v2_a035.json", "mobilenet_v2_a050.json", "mobilenet_v2_a075.json"}) {
            const auto plan = shape_plan(f, h);
            const auto perf = estimate_performance(plan, soc::emit_schedule(plan));
            CHECK(perf.fps < prev);
            prev = perf.fps;
        }
    }
}

TEST_CASE("perf totals are sums of invocations and FPS is frequency over cycles") {
    const auto plan = shape_plan("efficientnet.json", 0);
    const auto perf = estimate_performance(plan, soc::emit_schedule(plan), 100e6);
    std::uint64_t compute = 0, memory = 0, total = 0;
    for (const auto& p : perf.invocations) {
        CHECK(p.compute_cycles == p.stage_cycles + p.fill_cycles);
        CHECK(p.latency_cycles == std::max(p.compute_cycles, p.memory_cycles));
        CHECK(p.memory_cycles == (p.memory_bytes + kBusBytesPerCycle - 1) / kBusBytesPerCycle);
        compute += p.compute_cycles;
        memory += p.memory_cycles;
        total += p.latency_cycles;
    }
    CHECK(perf.compute_cycles == compute);
    CHECK(perf.memory_cycles == memory);
    CHECK(perf.total_cycles == total);
    CHECK(perf.fps == doctest::Approx(100e6 / static_cast<double>(total)));
    std::ostringstream table;
    write_perf_table(table, perf);
    CHECK_FALSE(table.str().empty());
}

TEST_CASE("doubling every knob halves stage cycles and leaves memory alone") {
    const auto base = shape_plan("mobilenet_v2_a050.json", 128);
    auto twice = base;
    for (auto& cu : twice.cus)
        for (auto& s : cu.slots) {
            s.lanes *= 2;
            s.parallel_ops *= 2;
        }
    const auto sched = soc::emit_schedule(base);
    const auto slow = estimate_performance(base, sched);
    const auto fast = estimate_performance(twice, sched);
    CHECK(fast.memory_cycles == slow.memory_cycles);
    for (std::size_t i = 0; i < fast.invocations.size(); ++i) {
        const auto a = fast.invocations[i].stage_cycles;
        const auto b = slow.invocations[i].stage_cycles;
        CHECK(a <= b);
        CHECK(2 * a >= b);
        CHECK(2 * a <= b + 1);
    }
}

TEST_CASE("performance estimate rejects non-positive settings") {
    const auto plan = shape_plan("toy.json", 0);
    const auto sched = soc::emit_schedule(plan);
    CHECK_THROWS_AS(estimate_performance(plan, sched, 0.0), PlanError);
    CHECK_THROWS_AS(estimate_performance(plan, sched, -1.0), PlanError);
    CHECK_THROWS_AS(estimate_performance(plan, sched, 1e6, 0), PlanError);
}

TEST_CASE("softmax is normalized and stable") {
    const auto p = softmax({1000.0, 1000.0, 0.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(0.0));
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> logits(static_cast<std::size_t>(between(rng, 1, 20)));
        for (auto& l : logits)
            l = rng.uniform(-50, 50);
        const auto q = softmax(logits);
        CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0));
        const auto top = std::max_element(logits.begin(), logits.end()) - logits.begin();
        CHECK(std::max_element(q.begin(), q.end()) - q.begin() == top);
    }
}
