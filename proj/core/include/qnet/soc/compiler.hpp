// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "qnet/soc/device.hpp"
#include "qnet/soc/plan.hpp"

namespace qnet::soc {

/// Per slot: K_max, N_max and M_max over the mapped layer instances, lanes
/// (N_max unless overridden) and parallel ops: K_max^2 * lanes for
/// depthwise and normal convolutions, lanes for pointwise and dense. Throws
/// PlanError for an override above N_max or below 1.
void derive_knobs(HardwarePlan& plan, const CompileOptions& options = {});

/// Buffer table per compute unit, each entry the maximum over instances:
/// line buffers K_max * W_max * N_max * BW for window operators, a weight
/// scratchpad holding the largest weight tensor per multiply slot, a FIFO
/// of one output row after every slot, the full-tensor squeeze-excite
/// buffer, and the residual buffer when the block input fits
/// `options.residual_budget_bits` (otherwise the residual goes off chip).
void size_buffers(HardwarePlan& plan, const CompileOptions& options = {});

/// Proxy utilization: one DSP per multiply lane, BRAM fraction from the
/// buffer bits. Over-budget plans are flagged, not rejected.
ResourceReport estimate_resources(const HardwarePlan& plan, const DeviceProfile& device);

/// partition_to_cus, derive_knobs, size_buffers and estimate_resources.
HardwarePlan compile_plan(const PlanInput& input, const DeviceProfile& device, const CompileOptions& options = {});

/// Sum of stage cycles at the current knobs, used by tests of the knob
/// scaling property (see runtime/perf.hpp for the full model).
std::uint64_t stage_cycles(const OperatorSlot& slot, const LayerParams& layer);

} // namespace qnet::soc
