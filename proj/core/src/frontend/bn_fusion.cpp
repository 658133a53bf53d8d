// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/bn_fusion.hpp"

#include <cmath>
#include <string>

namespace qnet::frontend {

ir::Layer fuse_batch_norm(const ir::Layer& conv, const ir::Layer& bn) {
    if (!conv.is_weighted() || !conv.has_weights())
        throw ShapeError("batch-norm '" + bn.name + "' must follow a weighted convolution or dense layer");
    if (bn.kind != ir::LayerKind::BatchNorm)
        throw ShapeError("layer '" + bn.name + "' is not a batch-norm");
    const auto m = static_cast<std::size_t>(conv.m);
    const auto& p = bn.bn;
    if (bn.n != conv.m || p.gamma.size() != m || p.beta.size() != m || p.mean.size() != m || p.var.size() != m)
        throw ShapeError("batch-norm '" + bn.name + "': channel-length mismatch with '" + conv.name + "'");
    if (!conv.bias.empty() && conv.bias.size() != m)
        throw ShapeError("layer '" + conv.name + "': bias length does not match M");

    ir::Layer out = conv;
    out.bias.assign(m, 0.0f);
    const std::size_t per_channel = conv.weight_count() / m;
    for (std::size_t c = 0; c < m; ++c) {
        const double denom = static_cast<double>(p.var[c]) + p.eps;
        if (!(denom > 0.0))
            throw ShapeError("batch-norm '" + bn.name + "': var + eps must be positive");
        const double inv_std = 1.0 / std::sqrt(denom);
        const double factor = p.gamma[c] * inv_std;
        for (std::size_t i = 0; i < per_channel; ++i) {
            float& w = out.weights[c * per_channel + i];
            w = static_cast<float>(w * factor);
        }
        const double b = conv.bias.empty() ? 0.0 : conv.bias[c];
        out.bias[c] = static_cast<float>((b - p.mean[c]) * factor + p.beta[c]);
    }
    return out;
}

ir::NetworkGraph fuse_batch_norms(const ir::NetworkGraph& graph) {
    ir::NetworkGraph out = graph;
    for (auto& block : out.blocks) {
        std::vector<ir::Layer> fused;
        for (const auto& l : block.layers) {
            if (l.kind != ir::LayerKind::BatchNorm) {
                fused.push_back(l);
                continue;
            }
            if (fused.empty() || !fused.back().is_weighted())
                throw ShapeError("batch-norm '" + l.name + "' is not preceded by a convolution");
            fused.back() = fuse_batch_norm(fused.back(), l);
        }
        block.layers = std::move(fused);
    }
    ir::validate(out);
    return out;
}

} // namespace qnet::frontend
