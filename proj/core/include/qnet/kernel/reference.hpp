// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "qnet/frontend/qnet.hpp"
#include "qnet/ir/tensor.hpp"

// Naive nested-loop operators. They define the semantics every streaming
// datapath is checked against.

namespace qnet::kernel {

/// Same padding for odd K: pad = K / 2 on every side, output = ceil(H / stride).
inline int same_pad(int k) { return k / 2; }

/// Float convolution, accumulated in double. Weights are [M, N/G, K, K];
/// dense layers are K = 1 convolutions over a (N, 1, 1) input.
ir::FloatTensor ref_conv(const ir::FloatTensor& input, const ir::FloatTensor& weights, std::span<const float> bias,
                         int stride, int groups);

/// Integer convolution producing the 32-bit accumulators
/// acc = sum (x - x_zero)(w - w_zero[m]) + bias[m]. Padding positions hold
/// x_zero, i.e. real zero. `weight_zero` has one entry or one per output
/// channel; `bias` may be empty. Throws StreamError if an accumulator
/// leaves the int32 range.
ir::IntTensor ref_conv(const ir::IntTensor& input, std::int32_t input_zero, const ir::IntTensor& weights,
                       std::span<const std::int32_t> weight_zero, std::span<const std::int32_t> bias, int stride,
                       int groups);

/// Accumulators of a quantized convolution or dense layer.
ir::IntTensor ref_conv(const frontend::QLayer& layer, const ir::IntTensor& input);

/// q = clamp(round(acc * multiplier) + zero_out, lo, hi). Doubles as the
/// fused ReLU6: the clamp bounds are the activation's quantized range.
std::int32_t approximate_and_clip(std::int64_t acc, const frontend::Requant& rq, std::int32_t zero_out,
                                  std::int32_t lo, std::int32_t hi, frontend::RequantMode mode);

/// Applies the layer's per-channel requantization to an accumulator tensor.
ir::IntTensor requantize(const ir::IntTensor& acc, const frontend::QLayer& layer, frontend::RequantMode mode);

/// Global average pooling to (C, 1, 1).
ir::FloatTensor ref_avg_pool(const ir::FloatTensor& input);
/// Integer global average pooling: rounded mean of the codes (input and
/// output share one spec).
ir::IntTensor ref_avg_pool(const ir::IntTensor& input);

/// Channel-wise gating: y = round((x - z) * g / 240) + z, g in [0, 240].
ir::IntTensor ref_se_scale(const ir::IntTensor& input, const ir::IntTensor& gate, const frontend::QLayer& scale,
                           frontend::RequantMode mode);

/// Full squeeze-excite branch: pool, squeeze (+ReLU6), excite
/// (+hard-sigmoid) and scale.
ir::IntTensor ref_squeeze_excite(const ir::IntTensor& input, const frontend::QLayer& squeeze,
                                 const frontend::QLayer& excite, const frontend::QLayer& scale,
                                 frontend::RequantMode mode);

/// Dequantize-add-requantize with saturation; `a` in the layer's in_spec,
/// `b` in its aux_spec.
ir::IntTensor ref_residual_add(const ir::IntTensor& a, const ir::IntTensor& b, const frontend::QLayer& add,
                               frontend::RequantMode mode);

/// Single-input operator: convolution + requantization, pooling, or dense
/// (returning raw int32 logits).
ir::IntTensor ref_layer(const frontend::QLayer& layer, const ir::IntTensor& input, frontend::RequantMode mode);

/// Worst-case accumulator magnitude:
/// (N/G) * K^2 * (2^BW_in - 1) * (2^BW_w - 1) + max |bias|.
std::int64_t accumulator_bound(const frontend::QLayer& layer);
/// Throws QuantError if the bound does not fit a signed 32-bit accumulator.
void check_accumulator_bound(const frontend::QLayer& layer);

} // namespace qnet::kernel
