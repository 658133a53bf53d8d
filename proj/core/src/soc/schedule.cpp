// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/schedule.hpp"

#include <algorithm>
#include <numeric>

#include "qnet/error.hpp"

namespace qnet::soc {

namespace {

std::uint64_t align_up(std::uint64_t v) { return (v + kRegionAlign - 1) / kRegionAlign * kRegionAlign; }

bool lifetimes_meet(const Region& a, const Region& b) { return a.first <= b.last && b.first <= a.last; }

bool bytes_meet(const Region& a, const Region& b) {
    return a.offset < b.offset + b.bytes && b.offset < a.offset + a.bytes;
}

} // namespace

std::string_view to_string(RegionKind kind) {
    switch (kind) {
    case RegionKind::Weights: return "weights";
    case RegionKind::QuantParams: return "qparams";
    case RegionKind::Feature: return "feature";
    case RegionKind::ResidualSpill: return "residual-spill";
    }
    return "?";
}

std::uint64_t packed_bytes(std::uint64_t count, int bw) { return (count * static_cast<std::uint64_t>(bw) + 7) / 8; }

std::uint64_t weight_bytes(const LayerParams& layer) { return packed_bytes(layer.weight_count(), layer.weight_bw); }

std::uint64_t qparam_bytes(const LayerParams& layer, OpType type) {
    if (is_mac_type(type))
        return kQParamHeaderBytes + kQParamRecordBytes * static_cast<std::uint64_t>(layer.m);
    switch (type) {
    case OpType::SeScale: return kQParamHeaderBytes + kQParamRecordBytes;
    case OpType::ResidualAdd: return kQParamHeaderBytes + kQParamPairBytes;
    default: return kQParamHeaderBytes;
    }
}

std::uint64_t feature_bytes(const ir::FeatureShape& shape, int bw) { return packed_bytes(shape.size(), bw); }

std::uint64_t spill_bytes(const HardwarePlan& plan, const Invocation& inv) {
    if (!inv.residual || plan.cu(inv.cu).residual != ResidualPlacement::OffChip)
        return 0;
    const auto& cu = plan.cu(inv.cu);
    std::uint64_t bytes = 0;
    for (const auto& l : inv.layers)
        if (cu.slots.at(static_cast<std::size_t>(l.slot)).type == OpType::ResidualAdd)
            bytes += feature_bytes(l.in, l.in_bw);
    return bytes;
}

Schedule emit_schedule(const HardwarePlan& plan) {
    Schedule s;
    s.arch_name = plan.arch_name;
    if (plan.invocations.empty())
        return s;
    const int n = static_cast<int>(plan.invocations.size());
    auto add = [&](std::string name, RegionKind kind, std::uint64_t bytes, int first, int last) {
        s.regions.push_back({std::move(name), kind, 0, bytes, first, last});
        return static_cast<int>(s.regions.size()) - 1;
    };

    for (const auto& inv : plan.invocations) {
        const auto& cu = plan.cu(inv.cu);
        std::uint64_t wbytes = 0, qbytes = 0;
        for (const auto& l : inv.layers) {
            wbytes += weight_bytes(l);
            qbytes += qparam_bytes(l, cu.slots.at(static_cast<std::size_t>(l.slot)).type);
        }
        ScheduledInvocation si;
        si.call = inv;
        const std::string tag = "inv" + std::to_string(inv.index) + "." + std::string(to_string(inv.cu));
        if (wbytes)
            si.weights_region = add(tag + ".weights", RegionKind::Weights, wbytes, 0, n);
        si.qparams_region = add(tag + ".qparams", RegionKind::QuantParams, qbytes, 0, n);
        s.invocations.push_back(std::move(si));
    }
    s.input_region = add("input", RegionKind::Feature,
                         feature_bytes(plan.invocations.front().in, plan.invocations.front().layers.front().in_bw), 0,
                         0);
    for (int i = 0; i < n; ++i) {
        auto& si = s.invocations[static_cast<std::size_t>(i)];
        const auto& inv = si.call;
        si.input_region = i == 0 ? s.input_region : s.invocations[static_cast<std::size_t>(i) - 1].output_region;
        const std::string tag = "inv" + std::to_string(i) + "." + std::string(to_string(inv.cu));
        si.output_region =
            add(tag + ".out", RegionKind::Feature, feature_bytes(inv.out, inv.layers.back().out_bw), i, i + 1);
        if (const auto spill = spill_bytes(plan, inv))
            si.spill_region = add(tag + ".spill", RegionKind::ResidualSpill, spill, i, i);
    }
    s.output_region = s.invocations.back().output_region;

    // Parameters: packed back to back, live for the whole inference.
    std::uint64_t cursor = 0;
    for (auto& r : s.regions)
        if (r.read_only()) {
            r.offset = cursor;
            cursor = align_up(cursor + r.bytes);
        }
    s.parameter_bytes = cursor;

    // Feature maps and spills: largest first, lowest fitting offset.
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < s.regions.size(); ++i)
        if (!s.regions[i].read_only())
            order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (s.regions[a].bytes != s.regions[b].bytes)
            return s.regions[a].bytes > s.regions[b].bytes;
        return s.regions[a].first < s.regions[b].first;
    });
    std::vector<std::size_t> placed;
    std::uint64_t end = s.parameter_bytes;
    for (std::size_t idx : order) {
        Region& r = s.regions[idx];
        std::vector<const Region*> live;
        for (std::size_t p : placed)
            if (lifetimes_meet(r, s.regions[p]))
                live.push_back(&s.regions[p]);
        std::sort(live.begin(), live.end(), [](const Region* a, const Region* b) { return a->offset < b->offset; });
        std::uint64_t off = s.parameter_bytes;
        for (const Region* o : live) {
            if (off + r.bytes <= o->offset)
                break;
            off = std::max(off, align_up(o->offset + o->bytes));
        }
        r.offset = off;
        end = std::max(end, align_up(off + r.bytes));
        placed.push_back(idx);
    }
    s.total_bytes = end;
    check_layout(s);
    return s;
}

void check_layout(const Schedule& schedule) {
    const auto& rs = schedule.regions;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (rs[i].offset + rs[i].bytes > schedule.total_bytes)
            throw PlanError("region '" + rs[i].name + "' ends past the shared memory");
        for (std::size_t j = i + 1; j < rs.size(); ++j)
            if (lifetimes_meet(rs[i], rs[j]) && bytes_meet(rs[i], rs[j]) && rs[i].bytes && rs[j].bytes)
                throw PlanError("live regions '" + rs[i].name + "' and '" + rs[j].name + "' overlap");
    }
}

} // namespace qnet::soc
