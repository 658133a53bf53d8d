// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/frontend/calibration.hpp"
#include "qnet/frontend/quant.hpp"
#include "qnet/ir/counting.hpp"
#include "qnet/ir/graph.hpp"

namespace qnet::frontend {

/// Activation absorbed into a convolution's requantization clamp.
enum class Activation { None, Relu6, HardSigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

/// Fixed spec of hard-sigmoid gate outputs: 8 bits, scale 1/40 and zero
/// point 120 put x = -3 at code 0 and x = +3 at code 240, so the clamped
/// code divided by 240 is relu6(x + 3) / 6.
inline constexpr int kGateBitWidth = 8;
inline constexpr std::int32_t kGateZeroPoint = 120;
inline constexpr std::int32_t kGateOne = 240;
QuantSpec gate_spec();

/// One integer operator of the QNet. Convolutions (including SE squeeze and
/// excite) carry quantized weights, int32 biases and a per-channel
/// requantization multiplier S_in * S_w / S_out.
struct QLayer {
    std::string name;
    ir::LayerKind kind = ir::LayerKind::PointwiseConv;
    ir::LayerRole role = ir::LayerRole::Conv;
    int n = 0;
    int m = 0;
    int k = 1;
    int stride = 1;
    int groups = 1;
    Activation act = Activation::None;

    QuantSpec in_spec;
    /// Second operand: block input for residual-add, gate for squeeze-excite.
    QuantSpec aux_spec;
    QuantSpec out_spec;

    QuantSpec weight_spec;
    ir::IntTensor weights; // [m, n/groups, k, k]
    std::vector<std::int32_t> bias;

    /// Per output channel for convolutions; one entry for squeeze-excite.
    std::vector<Requant> requant;
    /// Residual-add only.
    RequantPair pair;
    /// Dense only: real value of one accumulator unit per output channel.
    std::vector<double> logit_scale;

    bool is_conv() const;
    bool is_weighted() const { return is_conv() || kind == ir::LayerKind::Dense; }
    std::size_t weight_bits() const;
    std::size_t weight_count() const { return weights.size(); }

    bool operator==(const QLayer&) const = default;
};

struct QBlock {
    ir::BlockKind kind = ir::BlockKind::Plain;
    bool residual = false;
    std::vector<QLayer> layers;

    bool operator==(const QBlock&) const = default;
};

struct QNetModel {
    std::string arch_name;
    double alpha = 1.0;
    int input_resolution = 224;
    int input_channels = 3;
    bool tail_min_width = false;
    int bw = 4;
    RequantMode requant_mode = RequantMode::FixedPoint;
    QuantSpec input_spec;
    std::vector<QBlock> blocks;

    std::size_t layer_count() const;
    /// True when the last operator is a dense classifier producing int32
    /// logits; otherwise the last activation tensor is the output.
    bool has_classifier() const;

    bool operator==(const QNetModel&) const = default;
};

struct QuantConfig {
    int bw = 4;
    int first_conv_bw = 8;
    int input_bw = 8;
    QuantMode weight_mode = QuantMode::Asymmetric;
    Granularity weight_granularity = Granularity::PerChannel;
    RequantMode requant_mode = RequantMode::FixedPoint;
};

/// Lowers a batch-norm-fused float graph plus calibration statistics into
/// the integer QNet: ReLU6 and hard-sigmoid layers are absorbed into the
/// preceding convolution, weights are quantized, biases moved to the
/// accumulator domain and requantization multipliers derived. Throws
/// QuantError for a batch-norm (graph not fused), an activation that does
/// not follow a convolution, or a layer that would overflow the 32-bit
/// accumulator.
QNetModel fuse_activation(const ir::NetworkGraph& fused, const CalibrationStats& stats, const QuantConfig& cfg);

/// Shape-only structural view of a QNet (for planning and counting).
ir::NetworkGraph structure_of(const QNetModel& model);

/// Bit widths actually assigned to each weighted layer.
ir::BitWidthMap bit_widths_of(const QNetModel& model);

} // namespace qnet::frontend
