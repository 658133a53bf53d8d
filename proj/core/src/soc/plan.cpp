// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/plan.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "qnet/error.hpp"

namespace qnet::soc {

namespace {

constexpr std::array<std::pair<OpType, std::string_view>, 11> kOpNames = {{
    {OpType::NormalConv, "normal-conv"},
    {OpType::Depthwise, "depthwise"},
    {OpType::ExpandPw, "expand-pw"},
    {OpType::ProjectPw, "project-pw"},
    {OpType::Pointwise, "pointwise"},
    {OpType::SeSqueeze, "se-squeeze"},
    {OpType::SeExcite, "se-excite"},
    {OpType::Dense, "dense"},
    {OpType::AvgPool, "avg-pool"},
    {OpType::SeScale, "se-scale"},
    {OpType::ResidualAdd, "residual-add"},
}};

} // namespace

std::string_view to_string(CuKind kind) {
    switch (kind) {
    case CuKind::Head: return "Head";
    case CuKind::Body: return "Body";
    case CuKind::Tail: return "Tail";
    case CuKind::Classifier: return "Classifier";
    }
    return "?";
}

std::string_view to_string(OpType type) {
    for (const auto& [t, name] : kOpNames)
        if (t == type)
            return name;
    return "?";
}

OpType op_type_from_string(std::string_view s) {
    for (const auto& [t, name] : kOpNames)
        if (name == s)
            return t;
    throw PlanError("unknown operator type '" + std::string(s) + "'");
}

bool is_mac_type(OpType type) {
    switch (type) {
    case OpType::AvgPool:
    case OpType::SeScale:
    case OpType::ResidualAdd: return false;
    default: return true;
    }
}

bool is_window_type(OpType type) { return type == OpType::NormalConv || type == OpType::Depthwise; }

std::string_view to_string(ResidualPlacement p) {
    switch (p) {
    case ResidualPlacement::None: return "none";
    case ResidualPlacement::OnChip: return "on-chip";
    case ResidualPlacement::OffChip: return "off-chip";
    }
    return "?";
}

std::string_view to_string(BufferKind kind) {
    switch (kind) {
    case BufferKind::LineBuffer: return "line-buffer";
    case BufferKind::WeightScratchpad: return "weight-scratchpad";
    case BufferKind::Fifo: return "fifo";
    case BufferKind::SeBuffer: return "se-buffer";
    case BufferKind::ResidualBuffer: return "residual-buffer";
    }
    return "?";
}

int ComputeUnitPlan::fused_operator_count() const {
    return static_cast<int>(std::count_if(slots.begin(), slots.end(), [](const OperatorSlot& s) {
        return s.type != OpType::SeScale && s.type != OpType::ResidualAdd;
    }));
}

std::int64_t ComputeUnitPlan::multipliers() const {
    std::int64_t n = 0;
    for (const auto& s : slots)
        n += s.parallel_ops;
    return n;
}

std::int64_t ComputeUnitPlan::buffer_bits() const {
    std::int64_t n = 0;
    for (const auto& b : buffers)
        n += b.bits;
    return n;
}

std::uint64_t LayerParams::weight_count() const {
    if (weight_bw == 0)
        return 0;
    return static_cast<std::uint64_t>(m) * (n / groups) * k * k;
}

std::uint64_t LayerParams::macs() const {
    if (weight_bw == 0)
        return 0;
    return static_cast<std::uint64_t>(out.h) * out.w * weight_count();
}

const ComputeUnitPlan* HardwarePlan::find(CuKind kind) const {
    for (const auto& cu : cus)
        if (cu.kind == kind)
            return &cu;
    return nullptr;
}

const ComputeUnitPlan& HardwarePlan::cu(CuKind kind) const {
    if (const auto* p = find(kind))
        return *p;
    throw PlanError("plan has no " + std::string(to_string(kind)) + " compute unit");
}

int HardwarePlan::invocation_count(CuKind kind) const {
    return static_cast<int>(std::count_if(invocations.begin(), invocations.end(),
                                          [&](const Invocation& i) { return i.cu == kind; }));
}

} // namespace qnet::soc
