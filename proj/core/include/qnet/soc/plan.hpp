// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/ir/counting.hpp"
#include "qnet/ir/graph.hpp"
#include "qnet/soc/device.hpp"

namespace qnet::soc {

enum class CuKind { Head, Body, Tail, Classifier };

std::string_view to_string(CuKind kind);

/// Hardware operator type of a CU slot. Pointwise convolutions are split by
/// their position in the block since each type gets its own knob.
enum class OpType {
    NormalConv,
    Depthwise,
    ExpandPw,
    ProjectPw,
    Pointwise, // plain pointwise outside an IRB (tail feature conv)
    SeSqueeze,
    SeExcite,
    Dense,
    AvgPool,
    SeScale,
    ResidualAdd,
};

std::string_view to_string(OpType type);
OpType op_type_from_string(std::string_view s);

/// Multiply-array operators (the ones with a parallelism knob).
bool is_mac_type(OpType type);
/// Line-buffer (sliding window) operators.
bool is_window_type(OpType type);

enum class ResidualPlacement { None, OnChip, OffChip };

std::string_view to_string(ResidualPlacement p);

enum class BufferKind { LineBuffer, WeightScratchpad, Fifo, SeBuffer, ResidualBuffer };

std::string_view to_string(BufferKind kind);

/// One operator position of a fused CU template. Shape fields are maxima
/// over every layer instance mapped to the slot.
struct OperatorSlot {
    OpType type = OpType::Pointwise;
    /// False when some invocation of the CU has no layer in this slot.
    bool always_present = true;
    int k_max = 0;
    int n_max = 0;
    int m_max = 0;
    /// Knob: channels processed in parallel. Defaults to n_max.
    int lanes = 0;
    /// K_max^2 * lanes for window operators, lanes for pointwise and dense,
    /// 0 for operators without a multiply array.
    std::int64_t parallel_ops = 0;

    bool operator==(const OperatorSlot&) const = default;
};

struct BufferEntry {
    std::string name;
    BufferKind kind = BufferKind::Fifo;
    /// Slot the buffer belongs to (for FIFOs: the producing slot).
    int slot = -1;
    std::int64_t bits = 0;

    bool operator==(const BufferEntry&) const = default;
};

struct ComputeUnitPlan {
    CuKind kind = CuKind::Head;
    std::vector<OperatorSlot> slots;
    std::vector<BufferEntry> buffers;
    ResidualPlacement residual = ResidualPlacement::None;
    bool squeeze_excite = false;

    /// Operators excluding elementwise ones (SE scaling, residual add).
    int fused_operator_count() const;
    std::int64_t multipliers() const;
    std::int64_t buffer_bits() const;

    bool operator==(const ComputeUnitPlan&) const = default;
};

/// Runtime parameters of one layer inside an invocation.
struct LayerParams {
    std::size_t block = 0;
    std::size_t layer = 0; // index inside the block
    std::string name;
    int slot = 0;
    int n = 0;
    int m = 0;
    int k = 1;
    int stride = 1;
    int groups = 1;
    ir::FeatureShape in;
    ir::FeatureShape out;
    /// Weight bit width (weighted layers only).
    int weight_bw = 0;
    /// Bit width of the input and output feature codes (32 for logits).
    int in_bw = 0;
    int out_bw = 0;

    std::uint64_t macs() const;
    std::uint64_t weight_count() const;

    bool operator==(const LayerParams&) const = default;
};

/// One host call of a CU.
struct Invocation {
    int index = 0;
    CuKind cu = CuKind::Head;
    /// Position among the invocations of the same CU.
    int repeat = 0;
    std::vector<std::size_t> blocks;
    std::vector<LayerParams> layers;
    bool residual = false;
    bool squeeze_excite = false;
    ir::FeatureShape in;
    ir::FeatureShape out;

    bool operator==(const Invocation&) const = default;
};

struct ResourceReport {
    std::string device;
    std::int64_t multipliers = 0;
    /// One proxy DSP per multiply lane.
    std::int64_t dsp = 0;
    double dsp_fraction = 0.0;
    std::int64_t buffer_bits = 0;
    double bram_fraction = 0.0;
    bool feasible = true;
    std::vector<std::string> violations;

    bool operator==(const ResourceReport&) const = default;
};

/// Everything the planner needs from a network: a structure without batch
/// norm or standalone activation layers, plus bit widths.
struct PlanInput {
    ir::NetworkGraph graph;
    ir::BitWidthMap weight_bw;
    int input_bw = 8;
    int activation_bw = 4;
    int resolution = 224;
};

struct CompileOptions {
    /// Largest residual tensor kept on chip (bits).
    std::int64_t residual_budget_bits = 512 * 1024;
    /// Lane overrides per operator type, applied to every CU slot of that
    /// type; must not exceed the slot's N_max.
    std::map<OpType, int> lanes;

    bool operator==(const CompileOptions&) const = default;
};

struct HardwarePlan {
    std::string arch_name;
    double alpha = 1.0;
    int resolution = 224;
    int input_bw = 8;
    int activation_bw = 4;
    bool has_classifier = false;
    std::vector<ComputeUnitPlan> cus;
    std::vector<Invocation> invocations;
    DeviceProfile device;
    ResourceReport resources;
    CompileOptions options;

    const ComputeUnitPlan* find(CuKind kind) const;
    const ComputeUnitPlan& cu(CuKind kind) const;
    int invocation_count(CuKind kind) const;

    bool operator==(const HardwarePlan&) const = default;
};

} // namespace qnet::soc
