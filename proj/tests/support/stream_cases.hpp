// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Randomized streaming-kernel cases checked against naive oracles written
// here, independent of the library's reference operators.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "qnet/kernel/stream_ops.hpp"
#include "support/generators.hpp"

namespace qnet::testing {

enum class StreamKind { Depthwise, Normal, Pointwise, Group, AvgPool, SqueezeExcite, Residual };

inline const char* stream_kind_name(StreamKind k) {
    switch (k) {
    case StreamKind::Depthwise: return "depthwise";
    case StreamKind::Normal: return "normal";
    case StreamKind::Pointwise: return "pointwise";
    case StreamKind::Group: return "group";
    case StreamKind::AvgPool: return "avg-pool";
    case StreamKind::SqueezeExcite: return "squeeze-excite";
    case StreamKind::Residual: return "residual";
    }
    return "?";
}

inline constexpr StreamKind kAllStreamKinds[] = {StreamKind::Depthwise, StreamKind::Normal,
                                                 StreamKind::Pointwise, StreamKind::Group,
                                                 StreamKind::AvgPool,   StreamKind::SqueezeExcite,
                                                 StreamKind::Residual};

// Oracles.

inline std::int32_t clamp_code(std::int64_t v, const frontend::QuantSpec& spec) {
    const auto [lo, hi] = spec.bounds();
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(v, lo, hi));
}

/// Accumulators by explicit zero-point padding then direct summation.
inline std::vector<std::int64_t> oracle_accumulators(const frontend::QLayer& q, const ir::IntTensor& x) {
    const int h = x.height(), w = x.width(), pad = q.k / 2;
    const int hp = h + 2 * pad, wp = w + 2 * pad;
    const std::int32_t xz = q.in_spec.zero_at(0);
    std::vector<std::int32_t> padded(static_cast<std::size_t>(q.n) * hp * wp, xz);
    for (int c = 0; c < q.n; ++c)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                padded[(static_cast<std::size_t>(c) * hp + y + pad) * wp + xx + pad] = x.at(c, y, xx);
    const int ho = (h + q.stride - 1) / q.stride, wo = (w + q.stride - 1) / q.stride;
    const int in_per_group = q.n / q.groups, out_per_group = q.m / q.groups;
    std::vector<std::int64_t> acc(static_cast<std::size_t>(q.m) * ho * wo);
    for (int m = 0; m < q.m; ++m) {
        const std::int64_t wz = q.weight_spec.zero_at(static_cast<std::size_t>(m));
        const int first_in = (m / out_per_group) * in_per_group;
        for (int oy = 0; oy < ho; ++oy)
            for (int ox = 0; ox < wo; ++ox) {
                std::int64_t sum = q.bias.empty() ? 0 : q.bias[static_cast<std::size_t>(m)];
                for (int c = 0; c < in_per_group; ++c)
                    for (int ky = 0; ky < q.k; ++ky)
                        for (int kx = 0; kx < q.k; ++kx) {
                            const std::int64_t xv =
                                padded[(static_cast<std::size_t>(first_in + c) * hp + oy * q.stride + ky) * wp +
                                       ox * q.stride + kx];
                            const std::int64_t wv =
                                q.weights[((static_cast<std::size_t>(m) * in_per_group + c) * q.k + ky) * q.k + kx];
                            sum += (xv - xz) * (wv - wz);
                        }
                acc[(static_cast<std::size_t>(m) * ho + oy) * wo + ox] = sum;
            }
    }
    return acc;
}

inline ir::IntTensor oracle_conv(const frontend::QLayer& q, const ir::IntTensor& x, frontend::RequantMode mode) {
    const auto acc = oracle_accumulators(q, x);
    const int ho = (x.height() + q.stride - 1) / q.stride, wo = (x.width() + q.stride - 1) / q.stride;
    ir::IntTensor out({q.m, ho, wo});
    const std::size_t plane = static_cast<std::size_t>(ho) * wo;
    for (std::size_t i = 0; i < acc.size(); ++i)
        out[i] = clamp_code(q.requant[i / plane].apply(acc[i], mode) + q.out_spec.zero_at(0), q.out_spec);
    return out;
}

inline ir::IntTensor oracle_avg_pool(const ir::IntTensor& x) {
    const std::int64_t plane = static_cast<std::int64_t>(x.height()) * x.width();
    ir::IntTensor out({x.channels(), 1, 1});
    for (int c = 0; c < x.channels(); ++c) {
        std::int64_t sum = 0;
        for (int y = 0; y < x.height(); ++y)
            for (int xx = 0; xx < x.width(); ++xx)
                sum += x.at(c, y, xx);
        // Round half away from zero.
        const std::int64_t mag = (std::llabs(sum) * 2 + plane) / (2 * plane);
        out[static_cast<std::size_t>(c)] = static_cast<std::int32_t>(sum < 0 ? -mag : mag);
    }
    return out;
}

inline ir::IntTensor oracle_squeeze_excite(const ir::IntTensor& x, const SeLayers& se, frontend::RequantMode mode) {
    const auto gate_codes = oracle_conv(se.excite, oracle_conv(se.squeeze, oracle_avg_pool(x), mode), mode);
    const std::int32_t gate_lo = se.excite.out_spec.bounds().first;
    ir::IntTensor out(x.dims());
    const std::int32_t z = se.scale.in_spec.zero_at(0);
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < x.height(); ++y)
            for (int xx = 0; xx < x.width(); ++xx) {
                const std::int64_t g = gate_codes[static_cast<std::size_t>(c)] - gate_lo;
                const std::int64_t v = se.scale.requant[0].apply((x.at(c, y, xx) - z) * g, mode);
                out.at(c, y, xx) = clamp_code(v + se.scale.out_spec.zero_at(0), se.scale.out_spec);
            }
    return out;
}

inline ir::IntTensor oracle_residual(const ir::IntTensor& a, const ir::IntTensor& b, const frontend::QLayer& q,
                                     frontend::RequantMode mode) {
    ir::IntTensor out(a.dims());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = clamp_code(q.pair.apply(a[i] - q.in_spec.zero_at(0), b[i] - q.aux_spec.zero_at(0), mode) +
                                q.out_spec.zero_at(0),
                            q.out_spec);
    return out;
}

// Case runner.

struct StreamCaseSummary {
    int cases = 0;
    int failures = 0;
    std::string first_failure;
};

inline kernel::StreamOptions random_stream_options(Rng& rng) {
    kernel::StreamOptions o;
    o.driver = rng.uniform() < 0.2 ? kernel::Driver::Threaded : kernel::Driver::RoundRobin;
    o.fifo_depth = rng.uniform() < 0.3 ? 0 : static_cast<std::size_t>(between(rng, 1, 24));
    o.mode = rng.uniform() < 0.5 ? frontend::RequantMode::FixedPoint : frontend::RequantMode::Real;
    return o;
}

namespace detail {

inline std::string describe(StreamKind kind, std::uint64_t seed, const char* what) {
    std::ostringstream s;
    s << stream_kind_name(kind) << " case seed " << seed << ": " << what;
    return s.str();
}

// One case; returns an empty string on success.
inline std::string run_one(StreamKind kind, std::uint64_t seed) {
    Rng rng(seed);
    const int bw = pick(rng, {3, 4, 6, 8});
    const int h = between(rng, 1, 16), w = between(rng, 1, 16);
    auto opts = random_stream_options(rng);
    const auto in_spec = random_activation_spec(rng, bw);

    if (kind == StreamKind::AvgPool) {
        const int c = between(rng, 1, 16);
        const auto x = random_codes(rng, {c, h, w}, in_spec);
        const auto run = kernel::avg_pool_stream(x, opts);
        return run.output == oracle_avg_pool(x) ? "" : describe(kind, seed, "output differs from oracle");
    }
    if (kind == StreamKind::SqueezeExcite) {
        const int c = between(rng, 1, 16);
        const auto x = random_codes(rng, {c, h, w}, in_spec);
        const auto se = random_se(rng, c, in_spec, bw);
        const auto run = kernel::squeeze_excite_stream(x, se.squeeze, se.excite, se.scale, opts);
        return run.output == oracle_squeeze_excite(x, se, opts.mode) ? ""
                                                                      : describe(kind, seed, "output differs");
    }
    if (kind == StreamKind::Residual) {
        const int c = between(rng, 1, 16);
        const auto b_spec = random_activation_spec(rng, bw);
        const auto a = random_codes(rng, {c, h, w}, in_spec);
        const auto b = random_codes(rng, {c, h, w}, b_spec);
        const auto add = random_residual(rng, c, in_spec, b_spec, bw);
        const auto run = kernel::residual_add_stream(a, b, add, opts);
        return run.output == oracle_residual(a, b, add, opts.mode) ? "" : describe(kind, seed, "output differs");
    }

    ConvShape s;
    if (kind == StreamKind::Pointwise) {
        s = {ir::LayerKind::PointwiseConv, between(rng, 1, 16), between(rng, 1, 16), 1, 1, 1};
    } else if (kind == StreamKind::Depthwise) {
        const int c = between(rng, 1, 16);
        s = {ir::LayerKind::DepthwiseConv, c, c, pick(rng, {1, 3, 5}), pick(rng, {1, 2}), c};
    } else if (kind == StreamKind::Normal) {
        s = {ir::LayerKind::NormalConv, between(rng, 1, 16), between(rng, 1, 16), pick(rng, {1, 3, 5}),
             pick(rng, {1, 2}), 1};
    } else {
        const int g = pick(rng, {2, 4});
        s = {ir::LayerKind::NormalConv, g * between(rng, 1, 4), g * between(rng, 1, 4), pick(rng, {1, 3, 5}),
             pick(rng, {1, 2}), g};
    }
    const auto q = random_qconv(rng, s, in_spec, pick(rng, {3, 4, 6, 8}), bw, rng.uniform() < 0.5);
    const auto x = random_codes(rng, {s.n, h, w}, in_spec);
    const auto expected = oracle_conv(q, x, opts.mode);

    if (kind == StreamKind::Pointwise) {
        // Lane count changes the schedule, never the values.
        const int lanes = between(rng, 1, s.n);
        opts.lanes = lanes;
        const auto run = kernel::stream_conv_pw(q, x, opts);
        if (run.output != expected)
            return describe(kind, seed, "output differs from oracle");
        const std::uint64_t passes_per = static_cast<std::uint64_t>((s.n + lanes - 1) / lanes);
        if (run.passes != passes_per * static_cast<std::uint64_t>(h) * w * s.m)
            return describe(kind, seed, "multiplier pass count wrong");
        opts.lanes = 0;
        if (kernel::stream_conv_pw(q, x, opts).output != run.output)
            return describe(kind, seed, "output depends on lane count");
        return "";
    }

    // Shadow the window: every observed window must equal the padded input
    // region it claims to cover, in [ky][kx][c] order.
    const int pad = s.k / 2, wp = w + 2 * pad;
    bool window_ok = true;
    int windows = 0;
    opts.window_observer = [&](int oy, int ox, std::span<const std::int32_t> win) {
        ++windows;
        std::size_t i = 0;
        for (int ky = 0; ky < s.k; ++ky)
            for (int kx = 0; kx < s.k; ++kx)
                for (int c = 0; c < s.n; ++c, ++i) {
                    const int iy = oy * s.stride + ky - pad, ix = ox * s.stride + kx - pad;
                    const bool inside = iy >= 0 && iy < h && ix >= 0 && ix < w;
                    const std::int32_t want = inside ? x.at(c, iy, ix) : in_spec.zero_at(0);
                    if (i >= win.size() || win[i] != want)
                        window_ok = false;
                }
    };
    const auto run = kind == StreamKind::Depthwise ? kernel::stream_conv_dw(q, x, opts)
                                                   : kernel::stream_conv_normal(q, x, opts);
    if (run.output != expected)
        return describe(kind, seed, "output differs from oracle");
    const bool windowed = !(s.k == 1 && s.groups == 1 && s.stride == 1);
    if (windowed) {
        if (!window_ok)
            return describe(kind, seed, "window contents differ from padded input");
        if (windows != run.output.height() * run.output.width())
            return describe(kind, seed, "window count differs from output pixels");
        const std::size_t fill = static_cast<std::size_t>(s.k - 1) * wp + static_cast<std::size_t>(s.k);
        if (run.first_output_after != fill)
            return describe(kind, seed, "first output not produced after (K-1)*Wp+K pixels");
    }
    return "";
}

} // namespace detail

/// Runs `cases` random cases of one kind. Seeds derive from `seed` so every
/// failure names a single reproducible case.
inline StreamCaseSummary run_stream_cases(StreamKind kind, int cases, std::uint64_t seed) {
    StreamCaseSummary sum;
    for (int i = 0; i < cases; ++i) {
        const std::uint64_t case_seed = seed * 1000003u + static_cast<std::uint64_t>(kind) * 7919u + i;
        std::string err;
        try {
            err = detail::run_one(kind, case_seed);
        } catch (const std::exception& e) {
            err = detail::describe(kind, case_seed, e.what());
        }
        ++sum.cases;
        if (!err.empty()) {
            if (sum.failures++ == 0)
                sum.first_failure = err;
        }
    }
    return sum;
}

} // namespace qnet::testing
