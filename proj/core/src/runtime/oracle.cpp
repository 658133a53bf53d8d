// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/runtime/oracle.hpp"

#include "qnet/error.hpp"
#include "qnet/kernel/reference.hpp"

namespace qnet::runtime {

namespace {

void check_input(const frontend::QNetModel& model, const std::vector<int>& dims) {
    const std::vector<int> want{model.input_channels, model.input_resolution, model.input_resolution};
    if (dims != want)
        throw ShapeError("input " + ir::shape_string(dims) + " does not match model input " + ir::shape_string(want));
}

} // namespace

ir::IntTensor run_oracle(const frontend::QNetModel& model, const ir::IntTensor& input) {
    check_input(model, input.dims());
    const auto mode = model.requant_mode;
    ir::IntTensor cur = input;
    for (const auto& block : model.blocks) {
        const ir::IntTensor block_in = cur;
        for (std::size_t i = 0; i < block.layers.size(); ++i) {
            const auto& l = block.layers[i];
            if (l.kind == ir::LayerKind::AvgPool && block.kind == ir::BlockKind::InvertedResidual) {
                if (i + 3 >= block.layers.size())
                    throw ShapeError("squeeze-excite branch of '" + l.name + "' is incomplete");
                cur = kernel::ref_squeeze_excite(cur, block.layers[i + 1], block.layers[i + 2], block.layers[i + 3],
                                                 mode);
                i += 3;
            } else if (l.kind == ir::LayerKind::ResidualAdd) {
                cur = kernel::ref_residual_add(cur, block_in, l, mode);
            } else {
                cur = kernel::ref_layer(l, cur, mode);
            }
        }
    }
    return cur;
}

ir::IntTensor quantize_input(const frontend::QNetModel& model, const ir::FloatTensor& image) {
    check_input(model, image.dims());
    return frontend::quantize_tensor(image, model.input_spec);
}

} // namespace qnet::runtime
