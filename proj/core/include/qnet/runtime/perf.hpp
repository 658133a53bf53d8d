// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "qnet/soc/plan.hpp"
#include "qnet/soc/schedule.hpp"

namespace qnet::runtime {

inline constexpr double kNominalFrequencyHz = 200e6;
/// DDR bytes moved per cycle by the DMA engines.
inline constexpr std::uint64_t kBusBytesPerCycle = 16;

struct InvocationPerf {
    int invocation = 0;
    soc::CuKind cu = soc::CuKind::Head;
    /// Slowest fused stage: ceil(ops / parallel ops) of its layer.
    std::uint64_t stage_cycles = 0;
    /// Pipeline fill: line-buffer warm-up of every window stage, one cycle
    /// per stage hop, and the squeeze-excite pooling barrier.
    std::uint64_t fill_cycles = 0;
    std::uint64_t compute_cycles = 0; // stage + fill
    std::uint64_t memory_bytes = 0;
    std::uint64_t memory_cycles = 0;
    /// Streaming overlaps memory with compute: max of the two.
    std::uint64_t latency_cycles = 0;

    bool operator==(const InvocationPerf&) const = default;
};

struct PerfEstimate {
    std::vector<InvocationPerf> invocations;
    std::uint64_t compute_cycles = 0;
    std::uint64_t memory_cycles = 0;
    std::uint64_t total_cycles = 0;
    double frequency_hz = kNominalFrequencyHz;
    double fps = 0.0;

    bool operator==(const PerfEstimate&) const = default;
};

/// Overlap model of the fused CUs. Invocations run back to back, so totals
/// are sums over invocations and FPS = frequency / total cycles.
PerfEstimate estimate_performance(const soc::HardwarePlan& plan, const soc::Schedule& schedule,
                                  double frequency_hz = kNominalFrequencyHz,
                                  std::uint64_t bus_bytes_per_cycle = kBusBytesPerCycle);

/// Text table, one row per invocation plus totals.
void write_perf_table(std::ostream& out, const PerfEstimate& perf);

} // namespace qnet::runtime
