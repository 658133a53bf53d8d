// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/ir/counting.hpp"

#include <algorithm>
#include <cmath>

namespace qnet::ir {

int make_divisible(double value, int divisor) {
    int v = std::max(divisor, static_cast<int>(value + divisor / 2.0) / divisor * divisor);
    if (v < 0.9 * value)
        v += divisor;
    return v;
}

NetworkGraph apply_width_multiplier(const NetworkGraph& graph, double alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
        throw ShapeError("width multiplier must lie in (0, 1], got " + std::to_string(alpha));
    if (alpha == 1.0)
        return graph;
    if (graph.is_weighted())
        throw ShapeError("width-multiplied variants require their own weight blobs; "
                         "load the alpha-specific manifest instead of rescaling a weighted graph");
    if (graph.alpha != 1.0)
        throw ShapeError("width multiplier must be applied to the alpha=1 base graph");

    const auto roles = infer_roles(graph);
    NetworkGraph out = graph;
    out.alpha = alpha;

    auto positive = [](int c, const Layer& l) {
        if (c <= 0)
            throw ShapeError("width multiplier rounds layer '" + l.name + "' to zero channels");
        return c;
    };

    int cur_old = graph.input_channels;
    int cur_new = graph.input_channels;
    for (std::size_t b = 0; b < graph.blocks.size(); ++b) {
        const int block_in_old = cur_old;
        const int block_in_new = cur_new;
        int se_main_new = 0;
        for (std::size_t i = 0; i < graph.blocks[b].layers.size(); ++i) {
            const Layer& src = graph.blocks[b].layers[i];
            Layer& dst = out.blocks[b].layers[i];
            dst.n = cur_new;
            switch (roles[b][i]) {
            case LayerRole::Conv:
                if (src.kind == LayerKind::DepthwiseConv) {
                    dst.m = dst.groups = cur_new;
                } else {
                    dst.m = positive(make_divisible(src.m * alpha), src);
                    if (src.groups > 1 && (dst.n % src.groups || dst.m % src.groups))
                        throw ShapeError("layer '" + src.name + "': scaled widths no longer divisible by G");
                }
                break;
            case LayerRole::TailConv:
                dst.m = positive(graph.tail_min_width ? make_divisible(src.m * std::max(1.0, alpha))
                                                      : make_divisible(src.m * alpha),
                                 src);
                break;
            case LayerRole::Expand:
                dst.m = positive(static_cast<int>(std::lround(static_cast<double>(cur_new) * src.m / src.n)), src);
                break;
            case LayerRole::Depthwise:
                dst.m = dst.groups = cur_new;
                break;
            case LayerRole::SePool:
                se_main_new = cur_new;
                dst.m = cur_new;
                break;
            case LayerRole::SeSqueeze:
                dst.m = positive(std::max(1, block_in_new * src.m / block_in_old), src);
                break;
            case LayerRole::SeExcite:
                dst.m = se_main_new;
                break;
            case LayerRole::SeScale:
                dst.n = dst.m = se_main_new;
                break;
            case LayerRole::Project:
                dst.m = positive(make_divisible(src.m * alpha), src);
                break;
            case LayerRole::Classifier:
                dst.m = src.m;
                break;
            case LayerRole::Pool:
            case LayerRole::Residual:
            case LayerRole::Normalization:
            case LayerRole::Activation:
                dst.m = cur_new;
                break;
            }
            cur_old = src.m;
            cur_new = dst.m;
            if (src.kind == LayerKind::SqueezeExcite) {
                cur_old = src.m;
                cur_new = se_main_new;
            }
        }
        if (graph.blocks[b].residual && cur_new != block_in_new)
            throw ShapeError("width multiplier breaks the residual connection of block " + std::to_string(b));
    }
    validate(out);
    return out;
}

int BitWidthMap::at(const std::string& layer) const {
    auto it = per_layer.find(layer);
    return it == per_layer.end() ? default_bw : it->second;
}

BitWidthMap BitWidthMap::standard(const NetworkGraph& graph, int bw, int first_conv_bw) {
    BitWidthMap map;
    map.default_bw = bw;
    for (const auto& b : graph.blocks)
        for (const auto& l : b.layers)
            if (l.kind == LayerKind::NormalConv) {
                map.per_layer[l.name] = first_conv_bw;
                return map;
            }
    return map;
}

std::uint64_t count_params_bits(const NetworkGraph& graph, const BitWidthMap& bw) {
    std::uint64_t bits = 0;
    for (const auto& b : graph.blocks)
        for (const auto& l : b.layers)
            if (l.is_weighted())
                bits += (l.weight_count() + static_cast<std::uint64_t>(l.m)) * bw.at(l.name);
    return bits;
}

std::uint64_t layer_macs(const Layer& layer, const LayerGeometry& geo) {
    if (layer.kind == LayerKind::Dense)
        return static_cast<std::uint64_t>(layer.n) * layer.m;
    if (!layer.is_conv())
        return 0;
    const std::uint64_t per_output = static_cast<std::uint64_t>(layer.k) * layer.k * (layer.n / layer.groups);
    return static_cast<std::uint64_t>(geo.out.h) * geo.out.w * per_output * layer.m;
}

std::uint64_t count_ops(const NetworkGraph& graph, int resolution) {
    const auto geo = propagate_shapes(graph, resolution);
    std::uint64_t macs = 0;
    for (std::size_t b = 0; b < graph.blocks.size(); ++b)
        for (std::size_t i = 0; i < graph.blocks[b].layers.size(); ++i)
            macs += layer_macs(graph.blocks[b].layers[i], geo[b][i]);
    return macs;
}

double network_complexity(std::uint64_t params_bits, std::uint64_t ops) {
    return static_cast<double>(params_bits) * static_cast<double>(ops);
}

double network_complexity(const NetworkGraph& graph, const BitWidthMap& bw, int resolution) {
    return network_complexity(count_params_bits(graph, bw), count_ops(graph, resolution));
}

} // namespace qnet::ir
