// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>

#include "qnet/ir/graph.hpp"

namespace qnet::frontend {

/// min(max(x, 0), 6).
double relu6(double x);
/// relu6(x + 3) / 6.
double hard_sigmoid(double x);

using LayerObserver = std::function<void(const ir::Layer& layer, const ir::FloatTensor& output)>;

/// Float forward pass of a weighted graph (batch-norm fused or not). The
/// input is (C, H, W); the observer sees every layer output in order.
ir::FloatTensor forward(const ir::NetworkGraph& graph, const ir::FloatTensor& input,
                        const LayerObserver& observer = {});

} // namespace qnet::frontend
