// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/ir/graph.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <utility>

namespace qnet::ir {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 10> kKindNames{{
    {LayerKind::NormalConv, "normal-conv"},
    {LayerKind::DepthwiseConv, "depthwise-conv"},
    {LayerKind::PointwiseConv, "pointwise-conv"},
    {LayerKind::BatchNorm, "batch-norm"},
    {LayerKind::Relu6, "relu6"},
    {LayerKind::HardSigmoid, "hard-sigmoid"},
    {LayerKind::AvgPool, "avg-pool"},
    {LayerKind::ResidualAdd, "residual-add"},
    {LayerKind::SqueezeExcite, "squeeze-excite"},
    {LayerKind::Dense, "dense"},
}};

std::string where(std::size_t block, const Layer& layer) {
    return "block " + std::to_string(block) + " layer '" + layer.name + "'";
}

void require(bool ok, const std::string& msg) {
    if (!ok)
        throw ShapeError(msg);
}

void check_params(std::size_t b, const Layer& l) {
    if (l.is_weighted() && l.has_weights()) {
        if (l.weights.dims() != l.weight_dims())
            throw ManifestError(where(b, l) + ": weight shape " + shape_string(l.weights.dims()) +
                                " does not match " + shape_string(l.weight_dims()));
    }
    if (!l.bias.empty() && static_cast<int>(l.bias.size()) != l.m)
        throw ManifestError(where(b, l) + ": bias length " + std::to_string(l.bias.size()) +
                            " != M=" + std::to_string(l.m));
    if (l.kind == LayerKind::BatchNorm) {
        const auto& bn = l.bn;
        const bool empty = bn.gamma.empty() && bn.beta.empty() && bn.mean.empty() && bn.var.empty();
        if (!empty) {
            for (const auto* v : {&bn.gamma, &bn.beta, &bn.mean, &bn.var})
                if (static_cast<int>(v->size()) != l.m)
                    throw ManifestError(where(b, l) + ": batch-norm channel-length mismatch");
            for (float var : bn.var)
                if (!(var + bn.eps > 0.0))
                    throw ShapeError(where(b, l) + ": sigma^2 + eps must be positive");
        }
    }
}

// Walks the graph computing feature shapes; when `check` is set every
// invariant is enforced.
std::vector<std::vector<LayerGeometry>> walk(const NetworkGraph& g, int resolution, bool check) {
    if (g.blocks.empty() || g.layer_count() == 0)
        throw ManifestError("no layers");
    require(resolution > 0, "input resolution must be positive");
    require(g.input_channels > 0, "input channel count must be positive");

    std::vector<std::vector<LayerGeometry>> geo;
    geo.reserve(g.blocks.size());
    FeatureShape cur{g.input_channels, resolution, resolution};

    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        const Block& block = g.blocks[b];
        require(!block.layers.empty(), "block " + std::to_string(b) + " is empty");
        const FeatureShape block_in = cur;
        std::optional<FeatureShape> se_in;
        int depthwise_count = 0;
        bool has_residual = false;
        auto& out = geo.emplace_back();

        for (std::size_t i = 0; i < block.layers.size(); ++i) {
            const Layer& l = block.layers[i];
            const std::string at = where(b, l);
            LayerGeometry lg{cur, cur};

            if (l.kind != LayerKind::SqueezeExcite && l.n != cur.c)
                throw ShapeError(at + ": dangling edge, producer emits " + std::to_string(cur.c) +
                                 " channels but consumer expects N=" + std::to_string(l.n));
            if (!l.is_conv())
                require(l.stride == 1, at + ": stride only applies to convolutions");

            switch (l.kind) {
            case LayerKind::NormalConv:
                require(l.k >= 1 && l.k % 2 == 1, at + ": kernel size must be odd");
                require(l.stride >= 1, at + ": stride must be positive");
                require(l.groups >= 1 && l.n % l.groups == 0 && l.m % l.groups == 0,
                        at + ": group convolution requires N and M divisible by G");
                lg.out = {l.m, conv_output_size(cur.h, l.stride), conv_output_size(cur.w, l.stride)};
                break;
            case LayerKind::DepthwiseConv:
                require(l.groups == l.n && l.m == l.n, at + ": depthwise requires G = N and M = N");
                require(l.k >= 1 && l.k % 2 == 1, at + ": kernel size must be odd");
                require(l.stride >= 1, at + ": stride must be positive");
                ++depthwise_count;
                lg.out = {l.m, conv_output_size(cur.h, l.stride), conv_output_size(cur.w, l.stride)};
                break;
            case LayerKind::PointwiseConv:
                require(l.k == 1, at + ": pointwise requires K=1");
                require(l.groups == 1 && l.stride == 1, at + ": pointwise requires G=1 and stride 1");
                lg.out = {l.m, cur.h, cur.w};
                break;
            case LayerKind::BatchNorm:
            case LayerKind::Relu6:
            case LayerKind::HardSigmoid:
                require(l.m == l.n, at + ": elementwise layer requires M = N");
                break;
            case LayerKind::AvgPool:
                require(l.m == l.n, at + ": pooling requires M = N");
                if (block.kind == BlockKind::InvertedResidual) {
                    require(!se_in, at + ": nested squeeze-excite branch");
                    se_in = cur;
                }
                lg.out = {cur.c, 1, 1};
                break;
            case LayerKind::SqueezeExcite:
                require(se_in.has_value(), at + ": squeeze-excite without a preceding pool");
                require(l.n == se_in->c && l.m == l.n, at + ": squeeze-excite channel mismatch");
                if (cur != FeatureShape{se_in->c, 1, 1})
                    throw ShapeError(at + ": dangling edge, gate has " + std::to_string(cur.c) +
                                     " channels for a " + std::to_string(se_in->c) + "-channel tensor");
                lg.out = *se_in;
                se_in.reset();
                break;
            case LayerKind::ResidualAdd:
                require(block.residual, at + ": residual-add in a block without the residual flag");
                require(i + 1 == block.layers.size(), at + ": residual-add must close its block");
                require(l.m == l.n, at + ": residual-add requires M = N");
                if (cur != block_in)
                    throw ShapeError(at + ": residual connection requires block input shape == output shape");
                has_residual = true;
                break;
            case LayerKind::Dense:
                require(cur.h == 1 && cur.w == 1, at + ": dense layer expects a pooled 1x1 input");
                require(l.k == 1 && l.groups == 1, at + ": dense layer has K=1, G=1");
                lg.out = {l.m, 1, 1};
                break;
            }
            if (check)
                check_params(b, l);
            cur = lg.out;
            out.push_back(lg);
        }

        if (check) {
            require(!se_in, "block " + std::to_string(b) + ": unterminated squeeze-excite branch");
            require(block.residual == has_residual,
                    "block " + std::to_string(b) + ": residual flag set without residual-add layer");
            if (block.kind == BlockKind::InvertedResidual)
                require(depthwise_count == 1,
                        "block " + std::to_string(b) + ": inverted residual block needs exactly one depthwise");
            else
                require(!block.residual, "block " + std::to_string(b) + ": residual flag on a plain block");
        }
    }
    return geo;
}

} // namespace

std::string_view to_string(LayerKind kind) {
    for (auto [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
    for (auto [k, n] : kKindNames)
        if (n == name)
            return k;
    throw ManifestError("unknown layer kind '" + std::string(name) + "'");
}

std::string_view to_string(LayerRole role) {
    switch (role) {
    case LayerRole::Conv: return "conv";
    case LayerRole::TailConv: return "tail_pw";
    case LayerRole::Pool: return "pool";
    case LayerRole::Classifier: return "classifier";
    case LayerRole::Expand: return "expand";
    case LayerRole::Depthwise: return "depthwise";
    case LayerRole::SePool: return "se_pool";
    case LayerRole::SeSqueeze: return "se_squeeze";
    case LayerRole::SeExcite: return "se_excite";
    case LayerRole::SeScale: return "se_scale";
    case LayerRole::Project: return "project";
    case LayerRole::Residual: return "residual";
    case LayerRole::Normalization: return "norm";
    case LayerRole::Activation: return "act";
    }
    return "unknown";
}

bool Layer::is_conv() const {
    return kind == LayerKind::NormalConv || kind == LayerKind::DepthwiseConv ||
           kind == LayerKind::PointwiseConv;
}

bool Layer::is_weighted() const { return is_conv() || kind == LayerKind::Dense; }

std::vector<int> Layer::weight_dims() const {
    if (!is_weighted())
        return {};
    const int g = groups > 0 ? groups : 1;
    return {m, n / g, k, k};
}

std::size_t Layer::weight_count() const { return FloatTensor::element_count(weight_dims()); }

std::size_t NetworkGraph::layer_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks)
        n += b.layers.size();
    return n;
}

bool NetworkGraph::is_weighted() const {
    for (const auto& b : blocks)
        for (const auto& l : b.layers)
            if (l.is_weighted() && l.has_weights())
                return true;
    return false;
}

void validate(const NetworkGraph& graph) {
    walk(graph, graph.input_resolution, true);
    // Weighted-ness must be uniform: either every filter is present or none.
    const bool weighted = graph.is_weighted();
    for (std::size_t b = 0; b < graph.blocks.size(); ++b)
        for (const auto& l : graph.blocks[b].layers) {
            if (l.is_weighted() && l.has_weights() != weighted)
                throw ManifestError(where(b, l) + ": graph mixes weighted and shape-only layers");
            if (l.kind == LayerKind::BatchNorm && weighted && l.bn.gamma.empty())
                throw ManifestError(where(b, l) + ": batch-norm statistics missing");
        }
    if (!(graph.alpha > 0.0 && graph.alpha <= 4.0))
        throw ManifestError("alpha out of range");
}

std::vector<std::vector<LayerGeometry>> propagate_shapes(const NetworkGraph& graph, int resolution) {
    return walk(graph, resolution, false);
}

std::vector<std::vector<LayerRole>> infer_roles(const NetworkGraph& graph) {
    std::vector<std::vector<LayerRole>> roles;
    for (const auto& block : graph.blocks) {
        auto& out = roles.emplace_back();
        bool seen_dw = false;
        bool in_se = false;
        int se_convs = 0;
        for (const auto& l : block.layers) {
            LayerRole r = LayerRole::Conv;
            switch (l.kind) {
            case LayerKind::BatchNorm: r = LayerRole::Normalization; break;
            case LayerKind::Relu6:
            case LayerKind::HardSigmoid: r = LayerRole::Activation; break;
            case LayerKind::Dense: r = LayerRole::Classifier; break;
            case LayerKind::ResidualAdd: r = LayerRole::Residual; break;
            case LayerKind::SqueezeExcite:
                r = LayerRole::SeScale;
                in_se = false;
                break;
            case LayerKind::DepthwiseConv:
                r = block.kind == BlockKind::InvertedResidual ? LayerRole::Depthwise : LayerRole::Conv;
                seen_dw = true;
                break;
            case LayerKind::AvgPool:
                if (block.kind == BlockKind::InvertedResidual) {
                    r = LayerRole::SePool;
                    in_se = true;
                    se_convs = 0;
                } else {
                    r = LayerRole::Pool;
                }
                break;
            case LayerKind::NormalConv: r = LayerRole::Conv; break;
            case LayerKind::PointwiseConv:
                if (block.kind != BlockKind::InvertedResidual)
                    r = LayerRole::TailConv;
                else if (in_se)
                    r = se_convs++ == 0 ? LayerRole::SeSqueeze : LayerRole::SeExcite;
                else
                    r = seen_dw ? LayerRole::Project : LayerRole::Expand;
                break;
            }
            out.push_back(r);
        }
    }
    return roles;
}

} // namespace qnet::ir
