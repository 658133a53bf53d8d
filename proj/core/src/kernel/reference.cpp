// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/kernel/reference.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>

namespace qnet::kernel {

using frontend::QLayer;
using frontend::RequantMode;

namespace {

struct ConvShape {
    int n, h, w, m, kn, k, ho, wo;
};

template <typename T>
ConvShape conv_shape(const ir::Tensor<T>& input, const ir::Tensor<T>& weights, int stride, int groups) {
    if (input.rank() != 3 || weights.rank() != 4)
        throw ShapeError("ref_conv expects a (C,H,W) input and (M,N/G,K,K) weights");
    ConvShape s{input.dim(0), input.dim(1), input.dim(2), weights.dim(0), weights.dim(1), weights.dim(2), 0, 0};
    if (weights.dim(3) != s.k || s.k % 2 == 0)
        throw ShapeError("ref_conv requires square odd kernels");
    if (stride < 1 || groups < 1 || s.n % groups || s.m % groups || s.kn != s.n / groups)
        throw ShapeError("ref_conv: weights " + ir::shape_string(weights.dims()) + " do not match input " +
                         ir::shape_string(input.dims()) + " with G=" + std::to_string(groups));
    s.ho = ir::conv_output_size(s.h, stride);
    s.wo = ir::conv_output_size(s.w, stride);
    return s;
}

// Shared loop nest. `Acc` accumulates (x - xz) * (w - wz).
template <typename T, typename Acc, typename WeightZero, typename Bias>
void conv_loop(const ir::Tensor<T>& in, T xz, const ir::Tensor<T>& wt, WeightZero wz, Bias bias, int stride,
               int groups, const ConvShape& s, std::vector<Acc>& out) {
    const int pad = same_pad(s.k);
    const int m_per_group = s.m / groups;
    out.assign(static_cast<std::size_t>(s.m) * s.ho * s.wo, Acc{});
    for (int m = 0; m < s.m; ++m) {
        const int g = m / m_per_group;
        const Acc wzero = static_cast<Acc>(wz(m));
        for (int oy = 0; oy < s.ho; ++oy)
            for (int ox = 0; ox < s.wo; ++ox) {
                Acc acc = static_cast<Acc>(bias(m));
                for (int c = 0; c < s.kn; ++c) {
                    const int ic = g * s.kn + c;
                    for (int ky = 0; ky < s.k; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        for (int kx = 0; kx < s.k; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            const bool inside = iy >= 0 && iy < s.h && ix >= 0 && ix < s.w;
                            const Acc x = static_cast<Acc>(inside ? in.at(ic, iy, ix) : xz) - static_cast<Acc>(xz);
                            const std::size_t wi = ((static_cast<std::size_t>(m) * s.kn + c) * s.k + ky) * s.k + kx;
                            acc += x * (static_cast<Acc>(wt[wi]) - wzero);
                        }
                    }
                }
                out[(static_cast<std::size_t>(m) * s.ho + oy) * s.wo + ox] = acc;
            }
    }
}

} // namespace

ir::FloatTensor ref_conv(const ir::FloatTensor& input, const ir::FloatTensor& weights, std::span<const float> bias,
                         int stride, int groups) {
    const ConvShape s = conv_shape(input, weights, stride, groups);
    if (!bias.empty() && static_cast<int>(bias.size()) != s.m)
        throw ShapeError("ref_conv: bias length does not match M");
    std::vector<double> acc;
    conv_loop<float, double>(
        input, 0.0f, weights, [](int) { return 0.0; },
        [&](int m) { return bias.empty() ? 0.0 : static_cast<double>(bias[m]); }, stride, groups, s, acc);
    std::vector<float> out(acc.begin(), acc.end());
    return ir::FloatTensor({s.m, s.ho, s.wo}, std::move(out));
}

ir::IntTensor ref_conv(const ir::IntTensor& input, std::int32_t input_zero, const ir::IntTensor& weights,
                       std::span<const std::int32_t> weight_zero, std::span<const std::int32_t> bias, int stride,
                       int groups) {
    const ConvShape s = conv_shape(input, weights, stride, groups);
    if (!bias.empty() && static_cast<int>(bias.size()) != s.m)
        throw ShapeError("ref_conv: bias length does not match M");
    if (weight_zero.size() != 1 && static_cast<int>(weight_zero.size()) != s.m)
        throw ShapeError("ref_conv: weight zero points must be per-layer or per output channel");
    std::vector<std::int64_t> acc;
    conv_loop<std::int32_t, std::int64_t>(
        input, input_zero, weights, [&](int m) { return weight_zero[weight_zero.size() == 1 ? 0 : m]; },
        [&](int m) { return bias.empty() ? std::int64_t{0} : std::int64_t{bias[m]}; }, stride, groups, s, acc);
    std::vector<std::int32_t> out(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (acc[i] > std::numeric_limits<std::int32_t>::max() || acc[i] < std::numeric_limits<std::int32_t>::min())
            throw StreamError("accumulator overflow in ref_conv");
        out[i] = static_cast<std::int32_t>(acc[i]);
    }
    return ir::IntTensor({s.m, s.ho, s.wo}, std::move(out));
}

ir::IntTensor ref_conv(const QLayer& layer, const ir::IntTensor& input) {
    if (!layer.is_weighted())
        throw ShapeError("layer '" + layer.name + "' is not a convolution");
    return ref_conv(input, layer.in_spec.zero_at(0), layer.weights, layer.weight_spec.zero_point, layer.bias,
                    layer.stride, layer.groups);
}

std::int32_t approximate_and_clip(std::int64_t acc, const frontend::Requant& rq, std::int32_t zero_out,
                                  std::int32_t lo, std::int32_t hi, RequantMode mode) {
    const std::int64_t q = rq.apply(acc, mode) + zero_out;
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(q, lo, hi));
}

ir::IntTensor requantize(const ir::IntTensor& acc, const QLayer& layer, RequantMode mode) {
    if (static_cast<int>(layer.requant.size()) != acc.channels())
        throw ShapeError("layer '" + layer.name + "': requantization table does not match channel count");
    const auto [lo, hi] = layer.out_spec.bounds();
    const std::int32_t zero = layer.out_spec.zero_at(0);
    const std::size_t plane = acc.size() / acc.channels();
    ir::IntTensor out(acc.dims());
    for (std::size_t i = 0; i < acc.size(); ++i)
        out[i] = approximate_and_clip(acc[i], layer.requant[i / plane], zero, lo, hi, mode);
    return out;
}

ir::FloatTensor ref_avg_pool(const ir::FloatTensor& input) {
    const int c = input.channels();
    const std::size_t plane = static_cast<std::size_t>(input.height()) * input.width();
    ir::FloatTensor out({c, 1, 1});
    for (int ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i)
            sum += input[ch * plane + i];
        out[ch] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return out;
}

ir::IntTensor ref_avg_pool(const ir::IntTensor& input) {
    const int c = input.channels();
    const std::size_t plane = static_cast<std::size_t>(input.height()) * input.width();
    ir::IntTensor out({c, 1, 1});
    for (int ch = 0; ch < c; ++ch) {
        std::int64_t sum = 0;
        for (std::size_t i = 0; i < plane; ++i)
            sum += input[ch * plane + i];
        out[ch] = static_cast<std::int32_t>(frontend::div_round_half_away(sum, static_cast<std::int64_t>(plane)));
    }
    return out;
}

ir::IntTensor ref_se_scale(const ir::IntTensor& input, const ir::IntTensor& gate, const QLayer& scale,
                           RequantMode mode) {
    if (gate.dims() != std::vector<int>{input.channels(), 1, 1})
        throw ShapeError("squeeze-excite gate shape " + ir::shape_string(gate.dims()) + " does not match input " +
                         ir::shape_string(input.dims()));
    const std::int32_t zero = scale.in_spec.zero_at(0);
    const auto [lo, hi] = scale.out_spec.bounds();
    const std::size_t plane = input.size() / input.channels();
    ir::IntTensor out(input.dims());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const std::int64_t prod = static_cast<std::int64_t>(input[i] - zero) * gate[i / plane];
        out[i] = approximate_and_clip(prod, scale.requant.at(0), scale.out_spec.zero_at(0), lo, hi, mode);
    }
    return out;
}

ir::IntTensor ref_squeeze_excite(const ir::IntTensor& input, const QLayer& squeeze, const QLayer& excite,
                                 const QLayer& scale, RequantMode mode) {
    const ir::IntTensor pooled = ref_avg_pool(input);
    const ir::IntTensor hidden = ref_layer(squeeze, pooled, mode);
    const ir::IntTensor gate = ref_layer(excite, hidden, mode);
    ir::IntTensor shifted(gate.dims());
    for (std::size_t i = 0; i < gate.size(); ++i)
        shifted[i] = gate[i] - excite.out_spec.bounds().first;
    return ref_se_scale(input, shifted, scale, mode);
}

ir::IntTensor ref_residual_add(const ir::IntTensor& a, const ir::IntTensor& b, const QLayer& add,
                               RequantMode mode) {
    if (a.dims() != b.dims())
        throw ShapeError("residual add of " + ir::shape_string(a.dims()) + " and " + ir::shape_string(b.dims()));
    const std::int32_t za = add.in_spec.zero_at(0);
    const std::int32_t zb = add.aux_spec.zero_at(0);
    const std::int32_t zo = add.out_spec.zero_at(0);
    const auto [lo, hi] = add.out_spec.bounds();
    ir::IntTensor out(a.dims());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t q = add.pair.apply(a[i] - za, b[i] - zb, mode) + zo;
        out[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(q, lo, hi));
    }
    return out;
}

ir::IntTensor ref_layer(const QLayer& layer, const ir::IntTensor& input, RequantMode mode) {
    switch (layer.kind) {
    case ir::LayerKind::NormalConv:
    case ir::LayerKind::DepthwiseConv:
    case ir::LayerKind::PointwiseConv:
        return requantize(ref_conv(layer, input), layer, mode);
    case ir::LayerKind::Dense:
        return ref_conv(layer, input);
    case ir::LayerKind::AvgPool:
        return ref_avg_pool(input);
    default:
        throw ShapeError("layer '" + layer.name + "' of kind " + std::string(ir::to_string(layer.kind)) +
                         " needs two operands");
    }
}

std::int64_t accumulator_bound(const QLayer& layer) {
    if (!layer.is_weighted())
        return 0;
    const std::int64_t x_span = (std::int64_t{1} << layer.in_spec.bw) - 1;
    const std::int64_t w_span = (std::int64_t{1} << layer.weight_spec.bw) - 1;
    const std::int64_t fan_in = static_cast<std::int64_t>(layer.n / layer.groups) * layer.k * layer.k;
    std::int64_t max_bias = 0;
    for (std::int32_t b : layer.bias)
        max_bias = std::max<std::int64_t>(max_bias, std::llabs(b));
    return fan_in * x_span * w_span + max_bias;
}

void check_accumulator_bound(const QLayer& layer) {
    const std::int64_t bound = accumulator_bound(layer);
    if (bound > std::numeric_limits<std::int32_t>::max())
        throw QuantError("layer '" + layer.name + "': worst-case accumulator " + std::to_string(bound) +
                         " exceeds the 32-bit accumulator");
}

} // namespace qnet::kernel
