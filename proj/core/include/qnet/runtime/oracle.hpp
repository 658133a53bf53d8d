// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "qnet/frontend/qnet.hpp"
#include "qnet/ir/tensor.hpp"

namespace qnet::runtime {

/// Monolithic reference execution: every QNet operator runs on whole
/// tensors through the naive kernels, block by block. Returns the int32
/// logits (M, 1, 1) for networks with a classifier, otherwise the codes of
/// the last feature map.
ir::IntTensor run_oracle(const frontend::QNetModel& model, const ir::IntTensor& input);

/// Quantizes a float (C, H, W) image with the model's input spec; throws
/// ShapeError on a shape mismatch.
ir::IntTensor quantize_input(const frontend::QNetModel& model, const ir::FloatTensor& image);

} // namespace qnet::runtime
