// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/runtime/perf.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>

#include "qnet/error.hpp"
#include "qnet/runtime/trace.hpp"
#include "qnet/soc/compiler.hpp"

namespace qnet::runtime {

using soc::OpType;

PerfEstimate estimate_performance(const soc::HardwarePlan& plan, const soc::Schedule& schedule, double frequency_hz,
                                  std::uint64_t bus_bytes_per_cycle) {
    if (frequency_hz <= 0 || bus_bytes_per_cycle == 0)
        throw PlanError("frequency and bus width must be positive");
    const auto trace = trace_transactions(plan, schedule);
    PerfEstimate perf;
    perf.frequency_hz = frequency_hz;
    for (const auto& si : schedule.invocations) {
        const auto& inv = si.call;
        const auto& cu = plan.cu(inv.cu);
        InvocationPerf p;
        p.invocation = inv.index;
        p.cu = inv.cu;
        for (const auto& l : inv.layers) {
            const auto& slot = cu.slots.at(static_cast<std::size_t>(l.slot));
            p.stage_cycles = std::max(p.stage_cycles, soc::stage_cycles(slot, l));
            p.fill_cycles += 1;
            if (soc::is_window_type(slot.type) && l.k > 1) {
                const auto pad = static_cast<std::uint64_t>(l.k / 2);
                const auto padded_w = static_cast<std::uint64_t>(l.in.w) + 2 * pad;
                p.fill_cycles += static_cast<std::uint64_t>(l.k - 1) * padded_w + static_cast<std::uint64_t>(l.k);
            }
            // The gate needs the whole pooled tensor before scaling starts.
            if (slot.type == OpType::AvgPool && inv.squeeze_excite)
                p.fill_cycles += soc::stage_cycles(slot, l);
        }
        p.compute_cycles = p.stage_cycles + p.fill_cycles;
        for (const auto& t : trace.transactions)
            if (t.invocation == inv.index)
                p.memory_bytes += t.bytes;
        p.memory_cycles = (p.memory_bytes + bus_bytes_per_cycle - 1) / bus_bytes_per_cycle;
        p.latency_cycles = std::max(p.compute_cycles, p.memory_cycles);
        perf.compute_cycles += p.compute_cycles;
        perf.memory_cycles += p.memory_cycles;
        perf.total_cycles += p.latency_cycles;
        perf.invocations.push_back(p);
    }
    perf.fps = perf.total_cycles ? frequency_hz / static_cast<double>(perf.total_cycles) : 0.0;
    return perf;
}

void write_perf_table(std::ostream& out, const PerfEstimate& perf) {
    out << std::setw(4) << "inv" << ' ' << std::left << std::setw(11) << "cu" << std::right << std::setw(12) << "stage"
        << std::setw(10) << "fill" << std::setw(12) << "compute" << std::setw(12) << "mem bytes" << std::setw(12)
        << "memory" << std::setw(12) << "latency" << "\n";
    for (const auto& p : perf.invocations)
        out << std::setw(4) << p.invocation << ' ' << std::left << std::setw(11) << soc::to_string(p.cu) << std::right
            << std::setw(12) << p.stage_cycles << std::setw(10) << p.fill_cycles << std::setw(12) << p.compute_cycles
            << std::setw(12) << p.memory_bytes << std::setw(12) << p.memory_cycles << std::setw(12)
            << p.latency_cycles << "\n";
    char fps[32];
    std::snprintf(fps, sizeof fps, "%.2f", perf.fps);
    out << "total: compute " << perf.compute_cycles << " cycles, memory " << perf.memory_cycles << " cycles, latency "
        << perf.total_cycles << " cycles; " << fps << " FPS at " << perf.frequency_hz / 1e6 << " MHz\n";
}

} // namespace qnet::runtime
