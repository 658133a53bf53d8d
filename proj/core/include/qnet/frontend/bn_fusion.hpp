// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "qnet/ir/graph.hpp"

namespace qnet::frontend {

/// Folds a batch-norm into the convolution (or dense layer) feeding it:
/// w' = w * gamma / sqrt(var + eps) per output channel and
/// b' = (b - mean) * gamma / sqrt(var + eps) + beta, which reduces to
/// beta - gamma * mean / sqrt(var + eps) for a bias-free convolution.
/// Throws ShapeError on channel-length mismatch or var + eps <= 0.
ir::Layer fuse_batch_norm(const ir::Layer& conv, const ir::Layer& bn);

/// Folds every batch-norm of a weighted graph into its producer. A
/// batch-norm not directly preceded by a convolution or dense layer in the
/// same block is rejected.
ir::NetworkGraph fuse_batch_norms(const ir::NetworkGraph& graph);

} // namespace qnet::frontend
