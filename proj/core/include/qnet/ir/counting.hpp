// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qnet/ir/graph.hpp"

namespace qnet::ir {

/// Bits per megabit in reports (binary megabit, 2^20 bits).
inline constexpr double kBitsPerMb = 1024.0 * 1024.0;

/// Rounds a scaled channel count to a multiple of `divisor` (nearest, ties
/// up), never below `divisor`, and bumps one step up when rounding would
/// drop more than 10% of the requested width.
int make_divisible(double value, int divisor = 8);

/// Scales a shape-only graph by the width multiplier. Free channel counts
/// (stem, projection and tail outputs) are rounded with make_divisible;
/// expansion and squeeze widths keep their ratio to the block input.
/// Weighted graphs only accept alpha == 1: width variants need their own
/// trained weights.
NetworkGraph apply_width_multiplier(const NetworkGraph& graph, double alpha);

/// Per-layer weight/bias bit width, keyed by layer name.
struct BitWidthMap {
    int default_bw = 4;
    std::map<std::string, int> per_layer;

    int at(const std::string& layer) const;

    /// `bw` everywhere except the first normal convolution at `first_conv_bw`.
    static BitWidthMap standard(const NetworkGraph& graph, int bw = 4, int first_conv_bw = 8);
};

/// Deployment parameter footprint: for every convolution and dense layer,
/// (weights + M bias entries) x BW. Batch-norm statistics fold into the bias
/// and are not counted. Independent of resolution.
std::uint64_t count_params_bits(const NetworkGraph& graph, const BitWidthMap& bw);

/// Multiply-accumulate count of one layer at the given geometry
/// (H_out x W_out x K^2 x N/G x M for convolutions, N x M for dense).
std::uint64_t layer_macs(const Layer& layer, const LayerGeometry& geo);

/// Total multiply-accumulates; bias additions and requantization excluded.
std::uint64_t count_ops(const NetworkGraph& graph, int resolution);

/// Product of model size (bits) and operation count (MACs).
double network_complexity(std::uint64_t params_bits, std::uint64_t ops);
double network_complexity(const NetworkGraph& graph, const BitWidthMap& bw, int resolution);

} // namespace qnet::ir
