// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qnet/error.hpp"
#include "qnet/kernel/stream_ops.hpp"
#include "support/stream_cases.hpp"

using namespace qnet;
using namespace qnet::testing;

TEST_CASE("streaming kernels match the naive oracles on random cases") {
    for (StreamKind kind : kAllStreamKinds) {
        CAPTURE(stream_kind_name(kind));
        const auto sum = run_stream_cases(kind, 120, 11);
        CHECK_MESSAGE(sum.failures == 0, sum.first_failure);
        CHECK(sum.cases == 120);
    }
}

TEST_CASE("wire order is raster with channels innermost") {
    ir::IntTensor t({2, 2, 3});
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<std::int32_t>(i);
    const auto wire = kernel::to_wire(t);
    // (c, y, x) lands at (y * W + x) * C + c.
    CHECK(wire == std::vector<std::int32_t>{0, 6, 1, 7, 2, 8, 3, 9, 4, 10, 5, 11});
    CHECK(kernel::from_wire(wire, 2, 2, 3) == t);
}

namespace {

// 3x3 depthwise kernel with a single centre tap: output equals input.
frontend::QLayer delta_depthwise(int c) {
    frontend::QLayer q;
    q.name = "delta";
    q.kind = ir::LayerKind::DepthwiseConv;
    q.n = q.m = q.groups = c;
    q.k = 3;
    q.in_spec = frontend::make_quant_spec(0.0, 15.0, 4);
    q.out_spec = q.in_spec;
    const std::vector<double> lo(static_cast<std::size_t>(c), -1.0), hi(static_cast<std::size_t>(c), 1.0);
    q.weight_spec = frontend::make_per_channel_spec(lo, hi, 4, frontend::QuantMode::Symmetric);
    q.weights = ir::IntTensor({c, 1, 3, 3}, q.weight_spec.zero_at(0));
    for (int m = 0; m < c; ++m)
        q.weights[static_cast<std::size_t>(m) * 9 + 4] = q.weight_spec.zero_at(0) + 1;
    q.bias.assign(static_cast<std::size_t>(c), 0);
    q.requant.assign(static_cast<std::size_t>(c), frontend::Requant::from_real(1.0));
    return q;
}

} // namespace

TEST_CASE("delta kernel reproduces its input and a fixed push trace") {
    const auto q = delta_depthwise(2);
    ir::IntTensor x({2, 3, 4});
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<std::int32_t>(i % 16);
    std::ostringstream trace;
    kernel::StreamOptions opts;
    opts.trace = &trace;
    opts.fifo_depth = 4;
    const auto run = kernel::stream_conv_dw(q, x, opts);
    CHECK(run.output == x);
    REQUIRE(run.first_output_after.has_value());
    CHECK(*run.first_output_after == 2u * 6u + 3u);

    std::ifstream golden(std::string(QNET_GOLDEN_DIR) + "/delta_depthwise_trace.txt");
    REQUIRE_MESSAGE(golden.good(), "missing golden trace");
    std::stringstream want;
    want << golden.rdbuf();
    CHECK(trace.str() == want.str());
}

TEST_CASE("outputs saturate at the clamp bounds") {
    auto q = delta_depthwise(1);
    q.bias = {1000};
    ir::IntTensor x({1, 2, 2}, 3);
    const auto hi = kernel::stream_conv_dw(q, x).output;
    for (auto v : hi.storage())
        CHECK(v == q.out_spec.qmax());
    q.bias = {-1000};
    const auto lo = kernel::stream_conv_dw(q, x).output;
    for (auto v : lo.storage())
        CHECK(v == q.out_spec.qmin());
}

TEST_CASE("a consumer expecting more elements than produced reports underrun") {
    for (auto driver : {kernel::Driver::RoundRobin, kernel::Driver::Threaded}) {
        kernel::Pipeline p;
        auto& ch = p.channel("c", 4);
        p.add<kernel::SourceStage>("src", ch, 5, [](std::size_t i) { return static_cast<std::int32_t>(i); });
        p.add<kernel::SinkStage>("sink", ch, 6, [](std::size_t, std::int32_t) {});
        CHECK_THROWS_AS(p.run(driver), StreamError);
    }
}

TEST_CASE("a stage waiting on a channel nobody feeds is reported as deadlock") {
    for (auto driver : {kernel::Driver::RoundRobin, kernel::Driver::Threaded}) {
        kernel::Pipeline p;
        auto& fed = p.channel("fed", 2);
        auto& starved = p.channel("starved", 2);
        auto& out = p.channel("out", 2);
        p.add<kernel::SourceStage>("src", fed, 1, [](std::size_t) { return 1; });
        frontend::QLayer add;
        add.in_spec = add.aux_spec = add.out_spec = frontend::make_quant_spec(0.0, 1.0, 8);
        add.pair = frontend::RequantPair::from_real(1.0, 1.0);
        p.add<kernel::ResidualAddStage>("add", fed, starved, out, add, 1, frontend::RequantMode::FixedPoint);
        p.add<kernel::SinkStage>("sink", out, 1, [](std::size_t, std::int32_t) {});
        CHECK_THROWS_AS(p.run(driver), StreamError);
    }
}

TEST_CASE("channel statistics are identical across drivers") {
    Rng rng(5);
    const auto in_spec = random_activation_spec(rng, 4);
    const auto q = random_qconv(rng, {ir::LayerKind::NormalConv, 4, 6, 3, 2, 1}, in_spec, 4, 4, true);
    const auto x = random_codes(rng, {4, 9, 7}, in_spec);
    kernel::StreamOptions a, b;
    b.driver = kernel::Driver::Threaded;
    const auto ra = kernel::stream_conv(q, x, a), rb = kernel::stream_conv(q, x, b);
    CHECK(ra.output == rb.output);
    CHECK(ra.macs == rb.macs);
    REQUIRE(ra.channels.size() == rb.channels.size());
    for (std::size_t i = 0; i < ra.channels.size(); ++i) {
        CHECK(ra.channels[i].pushed == rb.channels[i].pushed);
        CHECK(ra.channels[i].popped == rb.channels[i].popped);
        CHECK(ra.channels[i].peak <= ra.channels[i].capacity);
    }
    // MACs: every output element reduces (N/G) K^2 products.
    CHECK(ra.macs == static_cast<std::uint64_t>(6 * 5 * 4) * 4 * 9);
}

TEST_CASE("line buffer holds K rows of the padded width") {
    Rng rng(9);
    const auto in_spec = random_activation_spec(rng, 8);
    const auto q = random_qconv(rng, {ir::LayerKind::DepthwiseConv, 3, 3, 5, 1, 3}, in_spec, 8, 8, false);
    kernel::Pipeline p;
    auto& in = p.channel("in", 8);
    auto& out = p.channel("out", 8);
    kernel::WindowConvStage conv("c", in, out, q, 6, 10, frontend::RequantMode::FixedPoint);
    CHECK(conv.line_buffer_elements() == 5u * (10 + 4) * 3);
}
