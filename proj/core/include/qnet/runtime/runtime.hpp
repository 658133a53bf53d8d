// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "qnet/frontend/qnet.hpp"
#include "qnet/ir/tensor.hpp"
#include "qnet/kernel/stream.hpp"
#include "qnet/runtime/memory.hpp"
#include "qnet/runtime/perf.hpp"
#include "qnet/runtime/trace.hpp"
#include "qnet/soc/plan.hpp"
#include "qnet/soc/schedule.hpp"

namespace qnet::runtime {

struct InferenceOptions {
    kernel::Driver driver = kernel::Driver::RoundRobin;
    /// FIFO depth between fused stages; 0 means one row of the producer.
    std::size_t fifo_depth = 0;
    /// Per-push stream trace of every invocation (see Pipeline::set_trace).
    std::ostream* stream_trace = nullptr;
    double frequency_hz = kNominalFrequencyHz;
};

struct InvocationStats {
    int invocation = 0;
    std::vector<kernel::ChannelStats> channels;
    std::uint64_t macs = 0;
};

struct InferenceResult {
    /// int32 logits (M, 1, 1) with a classifier, else the last feature map.
    ir::IntTensor output;
    /// Classifier only: index of the largest logit, real logits and softmax
    /// confidences.
    int argmax = -1;
    std::vector<double> logits;
    std::vector<double> confidences;
    /// Transfers observed while executing (equals trace_transactions).
    TransactionTrace trace;
    PerfEstimate perf;
    std::vector<InvocationStats> invocations;
};

/// Executes a schedule against the streaming kernels. Each invocation
/// burst-loads its layers' parameters from the shared memory image, streams
/// its input region through the fused stages and writes its output region;
/// invocations run one after the other. Not shareable across threads while
/// an inference is running.
class Runtime {
public:
    /// Initializes the parameter regions of a fresh memory image. Throws
    /// PlanError when plan, schedule and model disagree.
    Runtime(const frontend::QNetModel& model, soc::HardwarePlan plan, soc::Schedule schedule);

    /// `input` holds codes of the model's input spec, shaped (C, H, W).
    InferenceResult infer(const ir::IntTensor& input, const InferenceOptions& options = {});

    const soc::HardwarePlan& plan() const { return plan_; }
    const soc::Schedule& schedule() const { return schedule_; }
    const SharedMemoryImage& memory() const { return image_; }

private:
    void run_invocation(const soc::ScheduledInvocation& si, const InferenceOptions& options, InferenceResult& result);

    frontend::QNetModel model_;
    soc::HardwarePlan plan_;
    soc::Schedule schedule_;
    SharedMemoryImage image_;
};

/// Softmax of real logits (stable against large values).
std::vector<double> softmax(const std::vector<double>& logits);

} // namespace qnet::runtime
