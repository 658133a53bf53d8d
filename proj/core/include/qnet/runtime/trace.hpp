// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "qnet/soc/plan.hpp"
#include "qnet/soc/schedule.hpp"

namespace qnet::runtime {

/// Burst: memory-to-memory parameter copy into on-chip buffers. Stream:
/// element-wise feature-map transfer through a FIFO.
enum class TransferKind { Burst, Stream };
enum class Direction { Read, Write };
enum class TensorRole { Weights, QuantParams, Input, Output, ResidualSpill, Intermediate };

std::string_view to_string(TransferKind k);
std::string_view to_string(Direction d);
std::string_view to_string(TensorRole r);

struct Transaction {
    int invocation = 0;
    TransferKind kind = TransferKind::Stream;
    Direction direction = Direction::Read;
    TensorRole role = TensorRole::Input;
    std::uint64_t bytes = 0;

    bool operator==(const Transaction&) const = default;
};

struct TransactionTrace {
    std::vector<Transaction> transactions;

    std::uint64_t total(TransferKind kind) const;
    std::uint64_t total(TransferKind kind, int invocation) const;
    std::uint64_t total_bytes() const;
    /// Stream bytes moved by one invocation.
    std::uint64_t stream_bytes(int invocation) const { return total(TransferKind::Stream, invocation); }

    bool operator==(const TransactionTrace&) const = default;
};

/// Trace computed from shapes alone: per invocation, burst reads of its
/// packed weights and quantization records, a stream read of its input, a
/// stream write of its output, and for an off-chip residual a spill write
/// plus read back. Zero-byte transfers are omitted.
TransactionTrace trace_transactions(const soc::HardwarePlan& plan, const soc::Schedule& schedule);

/// Hypothetical execution of the same invocations one operator at a time,
/// every intermediate tensor going through DDR.
TransactionTrace unfused_trace(const soc::HardwarePlan& plan);

/// CSV table: invocation,cu,kind,direction,role,bytes.
void write_trace_csv(std::ostream& out, const TransactionTrace& trace, const soc::HardwarePlan& plan);

} // namespace qnet::runtime
