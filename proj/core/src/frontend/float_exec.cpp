// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/float_exec.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "qnet/kernel/reference.hpp"

namespace qnet::frontend {

double relu6(double x) { return std::min(std::max(x, 0.0), 6.0); }

double hard_sigmoid(double x) { return relu6(x + 3.0) / 6.0; }

namespace {

template <typename F>
ir::FloatTensor map(ir::FloatTensor t, F f) {
    for (auto& v : t.storage())
        v = static_cast<float>(f(static_cast<double>(v)));
    return t;
}

ir::FloatTensor batch_norm(const ir::FloatTensor& x, const ir::Layer& l) {
    const auto& p = l.bn;
    if (p.gamma.size() != static_cast<std::size_t>(x.channels()))
        throw ShapeError("batch-norm '" + l.name + "' has no statistics for " + std::to_string(x.channels()) +
                         " channels");
    ir::FloatTensor out = x;
    const std::size_t plane = x.size() / x.channels();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t c = i / plane;
        const double inv_std = 1.0 / std::sqrt(static_cast<double>(p.var[c]) + p.eps);
        out[i] = static_cast<float>(p.gamma[c] * (x[i] - p.mean[c]) * inv_std + p.beta[c]);
    }
    return out;
}

} // namespace

ir::FloatTensor forward(const ir::NetworkGraph& graph, const ir::FloatTensor& input, const LayerObserver& observer) {
    if (input.rank() != 3 || input.channels() != graph.input_channels)
        throw ShapeError("input " + ir::shape_string(input.dims()) + " does not match a " +
                         std::to_string(graph.input_channels) + "-channel network");
    if (!graph.is_weighted())
        throw ShapeError("float execution needs a weighted graph");

    ir::FloatTensor cur = input;
    for (const auto& block : graph.blocks) {
        const ir::FloatTensor block_in = cur;
        std::optional<ir::FloatTensor> se_main;
        for (const auto& l : block.layers) {
            switch (l.kind) {
            case ir::LayerKind::NormalConv:
            case ir::LayerKind::DepthwiseConv:
            case ir::LayerKind::PointwiseConv:
            case ir::LayerKind::Dense:
                cur = kernel::ref_conv(cur, l.weights, l.bias, l.stride, l.groups);
                break;
            case ir::LayerKind::BatchNorm:
                cur = batch_norm(cur, l);
                break;
            case ir::LayerKind::Relu6:
                cur = map(std::move(cur), relu6);
                break;
            case ir::LayerKind::HardSigmoid:
                cur = map(std::move(cur), hard_sigmoid);
                break;
            case ir::LayerKind::AvgPool:
                if (block.kind == ir::BlockKind::InvertedResidual)
                    se_main = cur;
                cur = kernel::ref_avg_pool(cur);
                break;
            case ir::LayerKind::SqueezeExcite: {
                if (!se_main)
                    throw ShapeError("squeeze-excite '" + l.name + "' without a pooled branch");
                ir::FloatTensor out = *se_main;
                const std::size_t plane = out.size() / out.channels();
                for (std::size_t i = 0; i < out.size(); ++i)
                    out[i] = static_cast<float>(static_cast<double>(out[i]) * cur[i / plane]);
                cur = std::move(out);
                se_main.reset();
                break;
            }
            case ir::LayerKind::ResidualAdd:
                if (cur.dims() != block_in.dims())
                    throw ShapeError("residual '" + l.name + "' shape mismatch");
                for (std::size_t i = 0; i < cur.size(); ++i)
                    cur[i] = static_cast<float>(static_cast<double>(cur[i]) + block_in[i]);
                break;
            }
            if (observer)
                observer(l, cur);
        }
    }
    return cur;
}

} // namespace qnet::frontend
