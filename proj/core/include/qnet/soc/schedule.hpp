// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/soc/plan.hpp"

namespace qnet::soc {

/// Alignment of every shared-memory region.
inline constexpr std::uint64_t kRegionAlign = 64;

/// Bytes of the per-layer quantization parameter header: input zero point,
/// output zero point, clamp low, clamp high (int32 each).
inline constexpr std::uint64_t kQParamHeaderBytes = 16;
/// One requantization record: bias, weight zero point, mantissa, shift
/// (int32 each) and the real multiplier (float64).
inline constexpr std::uint64_t kQParamRecordBytes = 24;
/// Residual-add record: aux zero point, shift (int32), two int64 mantissas
/// and two float64 multipliers.
inline constexpr std::uint64_t kQParamPairBytes = 40;

enum class RegionKind { Weights, QuantParams, Feature, ResidualSpill };

std::string_view to_string(RegionKind kind);

/// A byte range of the shared memory live from invocation `first` to
/// `last` inclusive. Invocation index N (one past the last) stands for the
/// host reading the result.
struct Region {
    std::string name;
    RegionKind kind = RegionKind::Feature;
    std::uint64_t offset = 0;
    std::uint64_t bytes = 0;
    int first = 0;
    int last = 0;

    bool read_only() const { return kind == RegionKind::Weights || kind == RegionKind::QuantParams; }
    bool operator==(const Region&) const = default;
};

struct ScheduledInvocation {
    Invocation call;
    int input_region = -1;
    int output_region = -1;
    int weights_region = -1;
    int qparams_region = -1;
    /// Off-chip residual round trip; -1 when none.
    int spill_region = -1;

    bool operator==(const ScheduledInvocation&) const = default;
};

/// Host schedule: CU invocations in order with the pointers they receive.
struct Schedule {
    std::string arch_name;
    std::vector<ScheduledInvocation> invocations;
    std::vector<Region> regions;
    /// Network input and final output regions.
    int input_region = -1;
    int output_region = -1;
    std::uint64_t parameter_bytes = 0;
    std::uint64_t total_bytes = 0;

    const Region& region(int index) const { return regions.at(static_cast<std::size_t>(index)); }
    bool operator==(const Schedule&) const = default;
};

/// ceil(count * bw / 8).
std::uint64_t packed_bytes(std::uint64_t count, int bw);

/// Weight bytes of a layer: its filters packed at the weight bit width.
std::uint64_t weight_bytes(const LayerParams& layer);
/// Quantization parameter bytes of a layer (header plus records).
std::uint64_t qparam_bytes(const LayerParams& layer, OpType type);
/// Feature-map bytes at the layer's input or output bit width.
std::uint64_t feature_bytes(const ir::FeatureShape& shape, int bw);

/// Bytes of an invocation's off-chip residual spill (0 when on chip).
std::uint64_t spill_bytes(const HardwarePlan& plan, const Invocation& inv);

/// Orders the invocations [Head, Body x j, Tail, Classifier] and lays out
/// one shared memory: parameters first (live throughout), then feature maps
/// and residual spills placed greedily, largest first, at the lowest offset
/// not overlapping any region with an intersecting lifetime.
Schedule emit_schedule(const HardwarePlan& plan);

/// Throws PlanError when two simultaneously live regions overlap or a
/// region leaves the layout.
void check_layout(const Schedule& schedule);

} // namespace qnet::soc
