// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "qnet/frontend/qnet.hpp"
#include "qnet/soc/plan.hpp"

namespace qnet::soc {

/// Planner view of a quantized network.
PlanInput plan_input(const frontend::QNetModel& model);

/// Planner view of a float or shape-only graph: batch-norm and activation
/// layers are dropped (they fuse away) and bit widths follow the standard
/// assignment. `resolution` <= 0 keeps the graph's own resolution.
PlanInput plan_input(const ir::NetworkGraph& graph, int bw = 4, int first_conv_bw = 8, int input_bw = 8,
                     int resolution = 0);

OpType op_type(ir::LayerKind kind, ir::LayerRole role);

/// Structural key of a block: block kind and main-path operator kinds.
/// Stride, kernel size, channel counts, the residual connection and the
/// squeeze-excite branch are ignored, so blocks differing only in those
/// share a Body template.
std::string block_signature(const ir::Block& block);

struct BlockRun {
    std::size_t begin = 0;
    std::size_t length = 0;
};

/// Longest contiguous run of inverted-residual blocks with equal
/// signatures; the earliest wins ties. length == 0 when the graph has no
/// inverted-residual block.
BlockRun longest_isomorphic_run(const ir::NetworkGraph& graph);

/// Groups blocks into compute units: blocks before the Body run form the
/// Head, the run is the Body (one invocation per block), trailing
/// pointwise and pooling blocks form the Tail and a final dense block the
/// Classifier. Slot templates and per-invocation parameters are filled in;
/// knobs, buffers and resources are left for the later passes. Throws
/// PlanError when a block fits no compute unit.
HardwarePlan partition_to_cus(const PlanInput& input);

} // namespace qnet::soc
