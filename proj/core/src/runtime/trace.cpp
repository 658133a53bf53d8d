// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/runtime/trace.hpp"

#include "qnet/frontend/qnet.hpp"

namespace qnet::runtime {

using soc::OpType;

std::string_view to_string(TransferKind k) { return k == TransferKind::Burst ? "burst" : "stream"; }

std::string_view to_string(Direction d) { return d == Direction::Read ? "read" : "write"; }

std::string_view to_string(TensorRole r) {
    switch (r) {
    case TensorRole::Weights: return "weights";
    case TensorRole::QuantParams: return "qparams";
    case TensorRole::Input: return "input";
    case TensorRole::Output: return "output";
    case TensorRole::ResidualSpill: return "residual-spill";
    case TensorRole::Intermediate: return "intermediate";
    }
    return "?";
}

std::uint64_t TransactionTrace::total(TransferKind kind) const {
    std::uint64_t sum = 0;
    for (const auto& t : transactions)
        if (t.kind == kind)
            sum += t.bytes;
    return sum;
}

std::uint64_t TransactionTrace::total(TransferKind kind, int invocation) const {
    std::uint64_t sum = 0;
    for (const auto& t : transactions)
        if (t.kind == kind && t.invocation == invocation)
            sum += t.bytes;
    return sum;
}

std::uint64_t TransactionTrace::total_bytes() const {
    std::uint64_t sum = 0;
    for (const auto& t : transactions)
        sum += t.bytes;
    return sum;
}

namespace {

void push(TransactionTrace& trace, int inv, TransferKind kind, Direction dir, TensorRole role, std::uint64_t bytes) {
    if (bytes > 0)
        trace.transactions.push_back({inv, kind, dir, role, bytes});
}

void push_parameters(TransactionTrace& trace, const soc::HardwarePlan& plan, const soc::Invocation& inv) {
    const auto& cu = plan.cu(inv.cu);
    std::uint64_t wbytes = 0, qbytes = 0;
    for (const auto& l : inv.layers) {
        wbytes += soc::weight_bytes(l);
        qbytes += soc::qparam_bytes(l, cu.slots.at(static_cast<std::size_t>(l.slot)).type);
    }
    push(trace, inv.index, TransferKind::Burst, Direction::Read, TensorRole::Weights, wbytes);
    push(trace, inv.index, TransferKind::Burst, Direction::Read, TensorRole::QuantParams, qbytes);
}

} // namespace

TransactionTrace trace_transactions(const soc::HardwarePlan& plan, const soc::Schedule& schedule) {
    TransactionTrace trace;
    for (const auto& si : schedule.invocations) {
        const auto& inv = si.call;
        push_parameters(trace, plan, inv);
        push(trace, inv.index, TransferKind::Stream, Direction::Read, TensorRole::Input,
             soc::feature_bytes(inv.in, inv.layers.front().in_bw));
        const auto spill = soc::spill_bytes(plan, inv);
        push(trace, inv.index, TransferKind::Stream, Direction::Write, TensorRole::ResidualSpill, spill);
        push(trace, inv.index, TransferKind::Stream, Direction::Read, TensorRole::ResidualSpill, spill);
        push(trace, inv.index, TransferKind::Stream, Direction::Write, TensorRole::Output,
             soc::feature_bytes(inv.out, inv.layers.back().out_bw));
    }
    return trace;
}

TransactionTrace unfused_trace(const soc::HardwarePlan& plan) {
    TransactionTrace trace;
    for (const auto& inv : plan.invocations) {
        const auto& cu = plan.cu(inv.cu);
        push_parameters(trace, plan, inv);
        const auto last = inv.layers.size() - 1;
        for (std::size_t i = 0; i < inv.layers.size(); ++i) {
            const auto& l = inv.layers[i];
            const auto type = cu.slots.at(static_cast<std::size_t>(l.slot)).type;
            const auto in_role = i == 0 ? TensorRole::Input : TensorRole::Intermediate;
            push(trace, inv.index, TransferKind::Stream, Direction::Read, in_role, soc::feature_bytes(l.in, l.in_bw));
            // Second operand of the elementwise operators.
            if (type == OpType::SeScale)
                push(trace, inv.index, TransferKind::Stream, Direction::Read, TensorRole::Intermediate,
                     soc::feature_bytes({l.in.c, 1, 1}, frontend::kGateBitWidth));
            if (type == OpType::ResidualAdd)
                push(trace, inv.index, TransferKind::Stream, Direction::Read, TensorRole::Intermediate,
                     soc::feature_bytes(l.in, l.in_bw));
            push(trace, inv.index, TransferKind::Stream, Direction::Write,
                 i == last ? TensorRole::Output : TensorRole::Intermediate, soc::feature_bytes(l.out, l.out_bw));
        }
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const TransactionTrace& trace, const soc::HardwarePlan& plan) {
    out << "invocation,cu,kind,direction,role,bytes\n";
    for (const auto& t : trace.transactions) {
        const auto& inv = plan.invocations.at(static_cast<std::size_t>(t.invocation));
        out << t.invocation << ',' << soc::to_string(inv.cu) << ',' << to_string(t.kind) << ','
            << to_string(t.direction) << ',' << to_string(t.role) << ',' << t.bytes << '\n';
    }
}

} // namespace qnet::runtime
