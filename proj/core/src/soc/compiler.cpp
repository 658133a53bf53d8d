// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/compiler.hpp"

#include <algorithm>
#include <cstdio>

#include "qnet/error.hpp"
#include "qnet/soc/structure.hpp"

namespace qnet::soc {

namespace {

std::int64_t tensor_bits(const ir::FeatureShape& s, int bw) { return static_cast<std::int64_t>(s.size()) * bw; }

template <typename F>
void for_each_instance(const HardwarePlan& plan, CuKind kind, F&& f) {
    for (const auto& inv : plan.invocations)
        if (inv.cu == kind)
            for (const auto& l : inv.layers)
                f(inv, l);
}

std::string percent(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * f);
    return buf;
}

} // namespace

void derive_knobs(HardwarePlan& plan, const CompileOptions& options) {
    for (const auto& [type, lanes] : options.lanes)
        if (!is_mac_type(type))
            throw PlanError("operator type '" + std::string(to_string(type)) + "' has no parallelism knob");
    for (auto& cu : plan.cus) {
        for (auto& s : cu.slots)
            s.k_max = s.n_max = s.m_max = 0;
        for_each_instance(plan, cu.kind, [&](const Invocation&, const LayerParams& l) {
            OperatorSlot& s = cu.slots.at(static_cast<std::size_t>(l.slot));
            s.k_max = std::max(s.k_max, l.k);
            s.n_max = std::max(s.n_max, l.n);
            s.m_max = std::max(s.m_max, l.m);
        });
        for (auto& s : cu.slots) {
            s.lanes = s.n_max;
            if (const auto it = options.lanes.find(s.type); it != options.lanes.end()) {
                if (it->second < 1 || it->second > s.n_max)
                    throw PlanError("lane override " + std::to_string(it->second) + " for " +
                                    std::string(to_string(s.type)) + " must lie in [1, " + std::to_string(s.n_max) +
                                    "]");
                s.lanes = it->second;
            }
            if (!is_mac_type(s.type))
                s.parallel_ops = 0;
            else if (is_window_type(s.type))
                s.parallel_ops = static_cast<std::int64_t>(s.k_max) * s.k_max * s.lanes;
            else
                s.parallel_ops = s.lanes;
        }
    }
    plan.options.lanes = options.lanes;
}

void size_buffers(HardwarePlan& plan, const CompileOptions& options) {
    for (auto& cu : plan.cus) {
        const std::size_t n = cu.slots.size();
        std::vector<std::int64_t> w_max(n, 0), in_bw(n, 0), weight_bits(n, 0), row_bits(n, 0);
        std::int64_t se_bits = 0, residual_bits = 0;
        bool has_residual = false;
        cu.squeeze_excite = false;
        for_each_instance(plan, cu.kind, [&](const Invocation& inv, const LayerParams& l) {
            const auto s = static_cast<std::size_t>(l.slot);
            w_max[s] = std::max<std::int64_t>(w_max[s], l.in.w);
            in_bw[s] = std::max<std::int64_t>(in_bw[s], l.in_bw);
            weight_bits[s] = std::max<std::int64_t>(weight_bits[s], static_cast<std::int64_t>(l.weight_count()) *
                                                                        l.weight_bw);
            row_bits[s] = std::max<std::int64_t>(row_bits[s], static_cast<std::int64_t>(l.out.w) * l.out.c * l.out_bw);
            const OpType t = cu.slots[s].type;
            if (t == OpType::AvgPool && cu.kind != CuKind::Tail && inv.squeeze_excite) {
                se_bits = std::max(se_bits, tensor_bits(l.in, l.in_bw));
                cu.squeeze_excite = true;
            }
            if (t == OpType::ResidualAdd) {
                has_residual = true;
                residual_bits = std::max(residual_bits, tensor_bits(l.in, l.in_bw));
            }
        });
        cu.buffers.clear();
        for (std::size_t s = 0; s < n; ++s) {
            const OperatorSlot& slot = cu.slots[s];
            const std::string tag = std::string(to_string(slot.type)) + "#" + std::to_string(s);
            if (is_window_type(slot.type))
                cu.buffers.push_back({"line_buffer." + tag, BufferKind::LineBuffer, static_cast<int>(s),
                                      static_cast<std::int64_t>(slot.k_max) * w_max[s] * slot.n_max * in_bw[s]});
            if (is_mac_type(slot.type))
                cu.buffers.push_back({"weights." + tag, BufferKind::WeightScratchpad, static_cast<int>(s),
                                      weight_bits[s]});
            cu.buffers.push_back({"fifo." + tag, BufferKind::Fifo, static_cast<int>(s), row_bits[s]});
        }
        if (cu.squeeze_excite)
            cu.buffers.push_back({"se_main", BufferKind::SeBuffer, -1, se_bits});
        cu.residual = ResidualPlacement::None;
        if (has_residual) {
            if (residual_bits <= options.residual_budget_bits) {
                cu.residual = ResidualPlacement::OnChip;
                cu.buffers.push_back({"residual", BufferKind::ResidualBuffer, -1, residual_bits});
            } else {
                cu.residual = ResidualPlacement::OffChip;
            }
        }
    }
    plan.options.residual_budget_bits = options.residual_budget_bits;
}

ResourceReport estimate_resources(const HardwarePlan& plan, const DeviceProfile& device) {
    ResourceReport r;
    r.device = device.name;
    for (const auto& cu : plan.cus) {
        r.multipliers += cu.multipliers();
        r.buffer_bits += cu.buffer_bits();
    }
    r.dsp = r.multipliers;
    r.dsp_fraction = device.dsp_count > 0 ? static_cast<double>(r.dsp) / device.dsp_count : 0.0;
    r.bram_fraction = device.bram_bits > 0 ? static_cast<double>(r.buffer_bits) / device.bram_bits : 0.0;
    if (r.dsp > device.dsp_count)
        r.violations.push_back("DSP " + std::to_string(r.dsp) + " of " + std::to_string(device.dsp_count) + " (" +
                               percent(r.dsp_fraction) + ")");
    if (r.buffer_bits > device.bram_bits)
        r.violations.push_back("BRAM bits " + std::to_string(r.buffer_bits) + " of " +
                               std::to_string(device.bram_bits) + " (" + percent(r.bram_fraction) + ")");
    r.feasible = r.violations.empty();
    return r;
}

HardwarePlan compile_plan(const PlanInput& input, const DeviceProfile& device, const CompileOptions& options) {
    HardwarePlan plan = partition_to_cus(input);
    derive_knobs(plan, options);
    size_buffers(plan, options);
    plan.device = device;
    plan.resources = estimate_resources(plan, device);
    return plan;
}

std::uint64_t stage_cycles(const OperatorSlot& slot, const LayerParams& layer) {
    const auto ceil_div = [](std::uint64_t a, std::uint64_t b) { return b ? (a + b - 1) / b : 0; };
    if (is_mac_type(slot.type))
        return ceil_div(layer.macs(), static_cast<std::uint64_t>(slot.parallel_ops));
    // Elementwise operators handle `lanes` channels per cycle.
    return ceil_div(std::max(layer.in.size(), layer.out.size()), static_cast<std::uint64_t>(slot.lanes));
}

} // namespace qnet::soc
