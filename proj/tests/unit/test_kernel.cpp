// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qnet/error.hpp"
#include "qnet/frontend/float_exec.hpp"
#include "qnet/kernel/reference.hpp"
#include "qnet/kernel/stream_ops.hpp"
#include "support/stream_cases.hpp"

using namespace qnet;
using namespace qnet::testing;
using frontend::RequantMode;

namespace {

// Layer with explicit weight codes around zero point 0 (symmetric, BW 8).
frontend::QLayer fixed_layer(ir::LayerKind kind, int n, int m, int k, int groups, std::vector<std::int32_t> weights,
                             std::vector<std::int32_t> bias, double multiplier, int bw = 8) {
    frontend::QLayer q;
    q.name = "l";
    q.kind = kind;
    q.n = n;
    q.m = m;
    q.k = k;
    q.groups = groups;
    q.in_spec = frontend::make_quant_spec(0.0, (1 << bw) - 1.0, bw);
    q.out_spec = q.in_spec;
    const std::vector<double> lo(static_cast<std::size_t>(m), -127.0), hi(static_cast<std::size_t>(m), 127.0);
    q.weight_spec = frontend::make_per_channel_spec(lo, hi, 8, frontend::QuantMode::Symmetric);
    q.weights = ir::IntTensor({m, n / groups, k, k}, std::move(weights));
    q.bias = std::move(bias);
    q.requant.assign(static_cast<std::size_t>(m), frontend::Requant::from_real(multiplier));
    return q;
}

} // namespace

TEST_CASE("single pixel convolution is an affine map") {
    const auto q = fixed_layer(ir::LayerKind::PointwiseConv, 1, 1, 1, 1, {3}, {1}, 1.0);
    for (std::int32_t x : {0, 1, 7, 50}) {
        ir::IntTensor in({1, 1, 1}, x);
        CHECK(kernel::ref_conv(q, in)[0] == 3 * x + 1);
        CHECK(kernel::stream_conv_pw(q, in).output[0] == std::min(3 * x + 1, 255));
    }
}

TEST_CASE("depthwise output channels depend only on their own input channel") {
    Rng rng(51);
    const auto spec = random_activation_spec(rng, 8);
    const auto q = random_qconv(rng, {ir::LayerKind::DepthwiseConv, 2, 2, 3, 1, 2}, spec, 8, 8, false);
    auto x = random_codes(rng, {2, 5, 5}, spec);
    const auto before = kernel::stream_conv_dw(q, x).output;
    for (int y = 0; y < 5; ++y)
        for (int xx = 0; xx < 5; ++xx)
            x.at(1, y, xx) = spec.qmax() - x.at(1, y, xx);
    const auto after = kernel::stream_conv_dw(q, x).output;
    for (int y = 0; y < 5; ++y)
        for (int xx = 0; xx < 5; ++xx)
            CHECK(after.at(0, y, xx) == before.at(0, y, xx));
}

TEST_CASE("group convolution equals independent convolutions on channel slices") {
    Rng rng(52);
    const auto spec = random_activation_spec(rng, 6);
    const auto g = random_qconv(rng, {ir::LayerKind::NormalConv, 4, 6, 3, 1, 2}, spec, 6, 6, false);
    const auto x = random_codes(rng, {4, 6, 6}, spec);
    const auto whole = kernel::stream_conv_normal(g, x).output;
    for (int half = 0; half < 2; ++half) {
        auto part = g;
        part.n = 2;
        part.m = 3;
        part.groups = 1;
        part.weights = ir::IntTensor({3, 2, 3, 3});
        part.bias.assign(g.bias.begin() + half * 3, g.bias.begin() + half * 3 + 3);
        part.requant.assign(g.requant.begin() + half * 3, g.requant.begin() + half * 3 + 3);
        std::vector<double> lo, hi;
        part.weight_spec.scale.assign(g.weight_spec.scale.begin() + half * 3, g.weight_spec.scale.begin() + half * 3 + 3);
        part.weight_spec.zero_point.assign(g.weight_spec.zero_point.begin() + half * 3,
                                           g.weight_spec.zero_point.begin() + half * 3 + 3);
        for (std::size_t i = 0; i < part.weights.size(); ++i)
            part.weights[i] = g.weights[static_cast<std::size_t>(half) * part.weights.size() + i];
        ir::IntTensor slice({2, 6, 6});
        for (int c = 0; c < 2; ++c)
            for (int y = 0; y < 6; ++y)
                for (int xx = 0; xx < 6; ++xx)
                    slice.at(c, y, xx) = x.at(half * 2 + c, y, xx);
        const auto out = kernel::stream_conv_normal(part, slice).output;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 6; ++y)
                for (int xx = 0; xx < 6; ++xx)
                    CHECK(out.at(c, y, xx) == whole.at(half * 3 + c, y, xx));
    }
}

TEST_CASE("identity kernel reproduces a single channel input") {
    std::vector<std::int32_t> w(9, 0);
    w[4] = 1;
    const auto q = fixed_layer(ir::LayerKind::DepthwiseConv, 1, 1, 3, 1, w, {0}, 1.0, 4);
    Rng rng(53);
    const auto x = random_codes(rng, {1, 4, 4}, q.in_spec);
    CHECK(kernel::stream_conv_dw(q, x).output == x);
}

TEST_CASE("named random shapes match the oracle bit-exactly") {
    Rng rng(54);
    const auto spec = random_activation_spec(rng, 4);
    const auto dw = random_qconv(rng, {ir::LayerKind::DepthwiseConv, 4, 4, 3, 2, 4}, spec, 4, 4, true);
    const auto x4 = random_codes(rng, {4, 8, 8}, spec);
    CHECK(kernel::stream_conv_dw(dw, x4).output == oracle_conv(dw, x4, RequantMode::FixedPoint));
    const auto nc = random_qconv(rng, {ir::LayerKind::NormalConv, 3, 8, 3, 1, 1}, spec, 4, 4, true);
    const auto x3 = random_codes(rng, {3, 8, 8}, spec);
    CHECK(kernel::stream_conv_normal(nc, x3).output == oracle_conv(nc, x3, RequantMode::FixedPoint));
    const auto pw = random_qconv(rng, {ir::LayerKind::PointwiseConv, 8, 16, 1, 1, 1}, spec, 4, 4, false);
    const auto x8 = random_codes(rng, {8, 4, 4}, spec);
    for (int lanes : {1, 4, 8}) {
        kernel::StreamOptions o;
        o.lanes = lanes;
        const auto run = kernel::stream_conv_pw(pw, x8, o);
        CHECK(run.output == oracle_conv(pw, x8, RequantMode::FixedPoint));
        CHECK(run.passes == static_cast<std::uint64_t>(8 / lanes) * 16 * 16);
    }
}

TEST_CASE("all-max operands saturate without accumulator overflow") {
    const int n = 4;
    auto q = fixed_layer(ir::LayerKind::NormalConv, n, 2, 3, 1, std::vector<std::int32_t>(2 * n * 9, 127), {0, 0},
                         1.0, 8);
    CHECK_NOTHROW(kernel::check_accumulator_bound(q));
    ir::IntTensor x({n, 5, 5}, 255);
    const auto out = kernel::stream_conv_normal(q, x).output;
    for (auto v : out.storage())
        CHECK(v == 255);
    // A layer whose worst case leaves int32 is rejected up front.
    auto huge = q;
    huge.n = 1 << 16;
    CHECK_THROWS_AS(kernel::check_accumulator_bound(huge), QuantError);
}

TEST_CASE("single-channel normal convolution reduces to depthwise") {
    Rng rng(55);
    const auto spec = random_activation_spec(rng, 8);
    auto nc = random_qconv(rng, {ir::LayerKind::NormalConv, 1, 1, 3, 1, 1}, spec, 8, 8, false);
    auto dw = nc;
    dw.kind = ir::LayerKind::DepthwiseConv;
    const auto x = random_codes(rng, {1, 7, 6}, spec);
    CHECK(kernel::stream_conv_normal(nc, x).output == kernel::stream_conv_dw(dw, x).output);
}

TEST_CASE("outputs stream pixel by pixel with all channels of a pixel together") {
    Rng rng(56);
    const auto spec = random_activation_spec(rng, 8);
    const auto q = random_qconv(rng, {ir::LayerKind::NormalConv, 3, 8, 3, 1, 1}, spec, 8, 8, false);
    const auto x = random_codes(rng, {3, 8, 8}, spec);
    std::ostringstream trace;
    kernel::StreamOptions o;
    o.trace = &trace;
    const auto run = kernel::stream_conv_normal(q, x, o);
    // Channels: 0 input, 1 padded, 2 output.
    std::vector<std::int32_t> out;
    std::istringstream in(trace.str());
    std::uint64_t tick;
    int ch;
    std::int32_t v;
    while (in >> tick >> ch >> v)
        if (ch == 2)
            out.push_back(v);
    REQUIRE(out.size() == run.output.size());
    for (int c = 0; c < 8; ++c) {
        CHECK(out[static_cast<std::size_t>(c)] == run.output.at(c, 0, 0));
        CHECK(out[static_cast<std::size_t>(8 + c)] == run.output.at(c, 0, 1));
    }
}

TEST_CASE("back-to-back pointwise layers equal the composed oracle") {
    Rng rng(57);
    const auto spec = random_activation_spec(rng, 4);
    const auto expand = random_qconv(rng, {ir::LayerKind::PointwiseConv, 4, 12, 1, 1, 1}, spec, 4, 4, true);
    const auto project = random_qconv(rng, {ir::LayerKind::PointwiseConv, 12, 4, 1, 1, 1}, expand.out_spec, 4, 4,
                                      false);
    const auto x = random_codes(rng, {4, 5, 5}, spec);
    const auto mid = kernel::stream_conv_pw(expand, x).output;
    CHECK(kernel::stream_conv_pw(project, mid).output ==
          oracle_conv(project, oracle_conv(expand, x, RequantMode::FixedPoint), RequantMode::FixedPoint));
}

TEST_CASE("approximate and clip") {
    const auto rq = frontend::Requant::from_real(0.37);
    CHECK(kernel::approximate_and_clip(0, rq, 5, 0, 15, RequantMode::FixedPoint) == 5);
    CHECK(kernel::approximate_and_clip(1 << 20, rq, 5, 0, 15, RequantMode::FixedPoint) == 15);
    CHECK(kernel::approximate_and_clip(-(1 << 20), rq, 5, 0, 15, RequantMode::FixedPoint) == 0);
    Rng rng(58);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto r = frontend::Requant::from_real(rng.uniform(1e-4, 1.0));
        const std::int64_t acc = rng.uniform_int(-200000, 200000);
        const auto exact = std::clamp<std::int64_t>(
            frontend::round_half_away(static_cast<double>(acc) * r.real) + 7, 0, 255);
        const auto fixed = kernel::approximate_and_clip(acc, r, 7, 0, 255, RequantMode::FixedPoint);
        CHECK(std::llabs(fixed - exact) <= 1);
        mismatches += fixed != exact ? 1 : 0;
    }
    MESSAGE("fixed-point vs real requantization mismatches: " << mismatches << " / 10000");
}

TEST_CASE("average pooling") {
    ir::IntTensor c({2, 3, 3}, 9);
    CHECK(kernel::avg_pool_stream(c).output == ir::IntTensor({2, 1, 1}, 9));
    ir::IntTensor alt({1, 2, 2}, std::vector<std::int32_t>{0, 15, 0, 15});
    CHECK(kernel::avg_pool_stream(alt).output[0] == 8); // round(30 / 4)
}

namespace {

// SE layers over an 8-bit input whose excite bias pins the gate.
SeLayers pinned_se(Rng& rng, int c, const frontend::QuantSpec& spec, std::int32_t excite_bias) {
    auto se = random_se(rng, c, spec, 8);
    std::fill(se.excite.weights.storage().begin(), se.excite.weights.storage().end(), se.excite.weight_spec.zero_at(0));
    for (std::size_t m = 0; m < se.excite.bias.size(); ++m) {
        std::fill(se.excite.weights.storage().begin() + static_cast<long>(m * se.excite.weights.size() / c),
                  se.excite.weights.storage().begin() + static_cast<long>((m + 1) * se.excite.weights.size() / c),
                  se.excite.weight_spec.zero_at(m));
        se.excite.bias[m] = excite_bias;
    }
    return se;
}

} // namespace

TEST_CASE("squeeze-excite with a saturated gate passes or zeroes its input") {
    Rng rng(59);
    const auto spec = random_activation_spec(rng, 8);
    const auto x = random_codes(rng, {5, 4, 4}, spec);
    const auto open = pinned_se(rng, 5, spec, 1 << 24);
    CHECK(kernel::squeeze_excite_stream(x, open.squeeze, open.excite, open.scale).output == x);
    const auto shut = pinned_se(rng, 5, spec, -(1 << 24));
    CHECK(kernel::squeeze_excite_stream(x, shut.squeeze, shut.excite, shut.scale).output ==
          ir::IntTensor(x.dims(), spec.zero_at(0)));
}

TEST_CASE("squeeze-excite stays within two steps of the float computation") {
    Rng rng(60);
    for (int trial = 0; trial < 50; ++trial) {
        const int c = between(rng, 2, 12), hidden = between(rng, 1, 6), h = between(rng, 2, 6);
        const auto spec = frontend::make_quant_spec(-rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0), 8);
        const auto x = random_codes(rng, {c, h, h}, spec);
        const auto xr = frontend::dequantize_tensor(x, spec);
        auto sq = random_qconv(rng, {ir::LayerKind::PointwiseConv, c, hidden, 1, 1, 1}, spec, 8, 8, true);
        auto ex = random_qconv(rng, {ir::LayerKind::PointwiseConv, hidden, c, 1, 1, 1}, sq.out_spec, 8, 8, false);
        const auto wsq = frontend::dequantize_tensor(sq.weights, sq.weight_spec);
        // Float squeeze on the float mean, to size the squeeze output range.
        std::vector<double> mean(static_cast<std::size_t>(c)), hid(static_cast<std::size_t>(hidden));
        for (int ch = 0; ch < c; ++ch) {
            for (int i = 0; i < h * h; ++i)
                mean[ch] += xr[static_cast<std::size_t>(ch * h * h + i)];
            mean[ch] /= h * h;
        }
        double hmax = 0.1;
        for (int m = 0; m < hidden; ++m) {
            double s = sq.bias[m] * spec.scale_at(0) * sq.weight_spec.scale_at(m);
            for (int ch = 0; ch < c; ++ch)
                s += mean[ch] * wsq[static_cast<std::size_t>(m * c + ch)];
            hid[m] = frontend::relu6(s);
            hmax = std::max(hmax, hid[m]);
        }
        sq.out_spec = frontend::make_quant_spec(0.0, hmax, 8);
        sq.out_spec.clip_lo = 0.0;
        sq.out_spec.clip_hi = 6.0;
        for (int m = 0; m < hidden; ++m)
            sq.requant[m] = frontend::Requant::from_real(spec.scale_at(0) * sq.weight_spec.scale_at(m) /
                                                         sq.out_spec.scale_at(0));
        ex.in_spec = sq.out_spec;
        ex.act = frontend::Activation::HardSigmoid;
        ex.out_spec = frontend::gate_spec();
        for (int m = 0; m < c; ++m)
            ex.requant[m] = frontend::Requant::from_real(ex.in_spec.scale_at(0) * ex.weight_spec.scale_at(m) /
                                                         ex.out_spec.scale_at(0));
        frontend::QLayer scale;
        scale.kind = ir::LayerKind::SqueezeExcite;
        scale.n = scale.m = c;
        scale.in_spec = scale.out_spec = spec;
        scale.aux_spec = frontend::gate_spec();
        scale.requant = {frontend::Requant::from_real(1.0 / frontend::kGateOne)};
        const auto wex = frontend::dequantize_tensor(ex.weights, ex.weight_spec);
        const auto got = kernel::squeeze_excite_stream(x, sq, ex, scale).output;
        for (int ch = 0; ch < c; ++ch) {
            double pre = ex.bias[ch] * ex.in_spec.scale_at(0) * ex.weight_spec.scale_at(ch);
            for (int m = 0; m < hidden; ++m)
                pre += hid[m] * wex[static_cast<std::size_t>(ch * hidden + m)];
            const double gate = frontend::hard_sigmoid(pre);
            for (int i = 0; i < h * h; ++i) {
                const auto idx = static_cast<std::size_t>(ch * h * h + i);
                const double want = xr[idx] * gate;
                const double have = frontend::dequantize_value(got[idx], spec.scale_at(0), spec.zero_at(0));
                CHECK(std::abs(have - want) <= 2 * spec.scale_at(0) + 1e-9);
            }
        }
    }
}

TEST_CASE("residual addition") {
    Rng rng(61);
    const auto sa = frontend::make_quant_spec(-1.0, 2.0, 8);
    const auto sb = frontend::make_quant_spec(-0.5, 3.0, 8);
    frontend::QLayer add;
    add.kind = ir::LayerKind::ResidualAdd;
    add.in_spec = sa;
    add.aux_spec = sb;
    add.out_spec = frontend::make_quant_spec(-2.0, 4.0, 8);
    const double so = add.out_spec.scale_at(0);
    add.pair = frontend::RequantPair::from_real(sa.scale_at(0) / so, sb.scale_at(0) / so);
    const auto a = random_codes(rng, {3, 4, 4}, sa);

    kernel::StreamOptions real;
    real.mode = RequantMode::Real;
    const auto alone = kernel::residual_add_stream(a, ir::IntTensor(a.dims(), sb.zero_at(0)), add, real).output;
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(alone[i] == clamp_code(frontend::round_half_away((a[i] - sa.zero_at(0)) * add.pair.real_a) +
                                         add.out_spec.zero_at(0),
                                     add.out_spec));

    auto same = add;
    same.aux_spec = sa;
    same.pair = frontend::RequantPair::from_real(sa.scale_at(0) / so, sa.scale_at(0) / so);
    const auto doubled = kernel::residual_add_stream(a, a, same).output;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double want = 2 * frontend::dequantize_value(a[i], sa.scale_at(0), sa.zero_at(0));
        CHECK(std::abs(frontend::dequantize_value(doubled[i], so, add.out_spec.zero_at(0)) - want) <= so + 1e-9);
    }

    for (int i = 0; i < 1000; ++i) {
        const auto x = random_codes(rng, {1, 1, 1}, sa), y = random_codes(rng, {1, 1, 1}, sb);
        const double real = (x[0] - sa.zero_at(0)) * sa.scale_at(0) + (y[0] - sb.zero_at(0)) * sb.scale_at(0);
        const auto want = clamp_code(frontend::round_half_away(real / so) + add.out_spec.zero_at(0), add.out_spec);
        CHECK(std::abs(kernel::residual_add_stream(x, y, add).output[0] - want) <= 1);
    }
}

TEST_CASE("mismatched shapes are rejected") {
    Rng rng(62);
    const auto spec = random_activation_spec(rng, 4);
    const auto q = random_qconv(rng, {ir::LayerKind::PointwiseConv, 4, 4, 1, 1, 1}, spec, 4, 4, false);
    CHECK_THROWS_AS(kernel::stream_conv_pw(q, random_codes(rng, {3, 2, 2}, spec)), ShapeError);
    CHECK_THROWS_AS(kernel::stream_conv_dw(q, random_codes(rng, {4, 2, 2}, spec)), ShapeError);
    frontend::QLayer add;
    add.in_spec = add.aux_spec = add.out_spec = spec;
    add.pair = frontend::RequantPair::from_real(1.0, 1.0);
    CHECK_THROWS(kernel::residual_add_stream(random_codes(rng, {2, 2, 2}, spec), random_codes(rng, {2, 3, 2}, spec),
                                             add));
}
