// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qnet/kernel/reference.hpp"

namespace qnet::frontend {

std::string_view to_string(Activation a) {
    switch (a) {
    case Activation::None: return "none";
    case Activation::Relu6: return "relu6";
    case Activation::HardSigmoid: return "hard-sigmoid";
    }
    return "none";
}

Activation activation_from_string(std::string_view s) {
    if (s == "none")
        return Activation::None;
    if (s == "relu6")
        return Activation::Relu6;
    if (s == "hard-sigmoid")
        return Activation::HardSigmoid;
    throw QuantError("unsupported activation '" + std::string(s) + "'");
}

QuantSpec gate_spec() {
    QuantSpec s;
    s.scale = {6.0 / kGateOne};
    s.zero_point = {kGateZeroPoint};
    s.bw = kGateBitWidth;
    s.clip_lo = -3.0;
    s.clip_hi = 3.0;
    return s;
}

bool QLayer::is_conv() const {
    return kind == ir::LayerKind::NormalConv || kind == ir::LayerKind::DepthwiseConv ||
           kind == ir::LayerKind::PointwiseConv;
}

std::size_t QLayer::weight_bits() const { return weights.size() * static_cast<std::size_t>(weight_spec.bw); }

std::size_t QNetModel::layer_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks)
        n += b.layers.size();
    return n;
}

bool QNetModel::has_classifier() const {
    return !blocks.empty() && !blocks.back().layers.empty() &&
           blocks.back().layers.back().kind == ir::LayerKind::Dense;
}

namespace {

QuantSpec activation_spec(const ChannelRange& r, int bw, Activation act) {
    double lo = r.tensor_min();
    double hi = r.tensor_max();
    if (act == Activation::Relu6) {
        lo = std::clamp(lo, 0.0, 6.0);
        hi = std::clamp(hi, 0.0, 6.0);
    }
    QuantSpec s = make_quant_spec(lo, hi, bw, QuantMode::Asymmetric);
    if (act == Activation::Relu6) {
        s.clip_lo = 0.0;
        s.clip_hi = 6.0;
    }
    return s;
}

QuantSpec weight_spec_for(const ir::Layer& l, int bw, const QuantConfig& cfg) {
    const std::size_t m = static_cast<std::size_t>(l.m);
    const std::size_t per = l.weight_count() / m;
    const auto w = l.weights.data();
    if (cfg.weight_granularity == Granularity::PerLayer) {
        const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
        return make_quant_spec(*lo, *hi, bw, cfg.weight_mode);
    }
    std::vector<double> mins(m), maxs(m);
    for (std::size_t c = 0; c < m; ++c) {
        const auto [lo, hi] = std::minmax_element(w.begin() + c * per, w.begin() + (c + 1) * per);
        mins[c] = *lo;
        maxs[c] = *hi;
    }
    return make_per_channel_spec(mins, maxs, bw, cfg.weight_mode);
}

void quantize_weights(QLayer& q, const ir::Layer& l, int bw, const QuantConfig& cfg) {
    q.weight_spec = weight_spec_for(l, bw, cfg);
    q.weights = quantize_tensor(l.weights, q.weight_spec);
    q.bias.assign(l.m, 0);
    const double s_in = q.in_spec.scale_at(0);
    for (int c = 0; c < l.m; ++c) {
        const double b = l.bias.empty() ? 0.0 : l.bias[c];
        const std::int64_t bq = round_half_away(b / (s_in * q.weight_spec.scale_at(c)));
        if (bq > std::numeric_limits<std::int32_t>::max() || bq < std::numeric_limits<std::int32_t>::min())
            throw QuantError("layer '" + l.name + "': quantized bias does not fit 32 bits");
        q.bias[c] = static_cast<std::int32_t>(bq);
    }
    if (l.kind == ir::LayerKind::Dense) {
        for (int c = 0; c < l.m; ++c)
            q.logit_scale.push_back(s_in * q.weight_spec.scale_at(c));
    } else {
        const double s_out = q.out_spec.scale_at(0);
        for (int c = 0; c < l.m; ++c)
            q.requant.push_back(Requant::from_real(s_in * q.weight_spec.scale_at(c) / s_out));
    }
    kernel::check_accumulator_bound(q);
}

QLayer shell(const ir::Layer& l, ir::LayerRole role) {
    QLayer q;
    q.name = l.name;
    q.kind = l.kind;
    q.role = role;
    q.n = l.n;
    q.m = l.m;
    q.k = l.k;
    q.stride = l.stride;
    q.groups = l.groups;
    return q;
}

} // namespace

QNetModel fuse_activation(const ir::NetworkGraph& fused, const CalibrationStats& stats, const QuantConfig& cfg) {
    if (!fused.is_weighted())
        throw QuantError("quantization needs a weighted graph");
    if (cfg.bw < kMinBitWidth || cfg.bw > kMaxBitWidth)
        throw QuantError("bit width " + std::to_string(cfg.bw) + " outside [2, 8]");
    const auto roles = ir::infer_roles(fused);
    const ir::BitWidthMap bw_map = ir::BitWidthMap::standard(fused, cfg.bw, cfg.first_conv_bw);

    QNetModel out;
    out.arch_name = fused.arch_name;
    out.alpha = fused.alpha;
    out.input_resolution = fused.input_resolution;
    out.input_channels = fused.input_channels;
    out.tail_min_width = fused.tail_min_width;
    out.bw = cfg.bw;
    out.requant_mode = cfg.requant_mode;
    out.input_spec = activation_spec(stats.at(CalibrationStats::kInputKey), cfg.input_bw, Activation::None);

    QuantSpec cur = out.input_spec;
    for (std::size_t b = 0; b < fused.blocks.size(); ++b) {
        const auto& block = fused.blocks[b];
        QBlock qb{block.kind, block.residual, {}};
        const QuantSpec block_in = cur;
        QuantSpec se_main;
        for (std::size_t i = 0; i < block.layers.size(); ++i) {
            const ir::Layer& l = block.layers[i];
            QLayer q = shell(l, roles[b][i]);
            q.in_spec = cur;
            switch (l.kind) {
            case ir::LayerKind::BatchNorm:
                throw QuantError("layer '" + l.name + "': graph is not batch-norm fused");
            case ir::LayerKind::Relu6:
            case ir::LayerKind::HardSigmoid:
                throw QuantError("activation '" + l.name + "' does not follow a convolution");
            case ir::LayerKind::NormalConv:
            case ir::LayerKind::DepthwiseConv:
            case ir::LayerKind::PointwiseConv:
            case ir::LayerKind::Dense: {
                std::string key = l.name;
                if (i + 1 < block.layers.size()) {
                    const ir::Layer& next = block.layers[i + 1];
                    if (next.kind == ir::LayerKind::Relu6 || next.kind == ir::LayerKind::HardSigmoid) {
                        if (l.kind == ir::LayerKind::Dense)
                            throw QuantError("activation after dense layer '" + l.name + "' is not supported");
                        q.act = next.kind == ir::LayerKind::Relu6 ? Activation::Relu6 : Activation::HardSigmoid;
                        key = next.name;
                        ++i;
                    }
                }
                if (l.kind != ir::LayerKind::Dense)
                    q.out_spec = q.act == Activation::HardSigmoid ? gate_spec()
                                                                   : activation_spec(stats.at(key), cfg.bw, q.act);
                quantize_weights(q, l, bw_map.at(l.name), cfg);
                break;
            }
            case ir::LayerKind::AvgPool:
                if (block.kind == ir::BlockKind::InvertedResidual)
                    se_main = cur;
                q.out_spec = cur;
                break;
            case ir::LayerKind::SqueezeExcite:
                if (cur.bw != kGateBitWidth || cur.zero_point != gate_spec().zero_point)
                    throw QuantError("squeeze-excite '" + l.name + "' must be gated by a hard-sigmoid");
                q.in_spec = se_main;
                q.aux_spec = cur;
                q.out_spec = se_main;
                q.requant = {Requant::from_real(1.0 / kGateOne)};
                break;
            case ir::LayerKind::ResidualAdd:
                q.aux_spec = block_in;
                q.out_spec = activation_spec(stats.at(l.name), cfg.bw, Activation::None);
                q.pair = RequantPair::from_real(cur.scale_at(0) / q.out_spec.scale_at(0),
                                                block_in.scale_at(0) / q.out_spec.scale_at(0));
                break;
            }
            cur = q.out_spec;
            qb.layers.push_back(std::move(q));
        }
        out.blocks.push_back(std::move(qb));
    }
    return out;
}

ir::NetworkGraph structure_of(const QNetModel& model) {
    ir::NetworkGraph g;
    g.arch_name = model.arch_name;
    g.alpha = model.alpha;
    g.input_resolution = model.input_resolution;
    g.input_channels = model.input_channels;
    g.tail_min_width = model.tail_min_width;
    for (const auto& qb : model.blocks) {
        ir::Block b{qb.kind, qb.residual, {}};
        for (const auto& q : qb.layers) {
            ir::Layer l;
            l.name = q.name;
            l.kind = q.kind;
            l.n = q.n;
            l.m = q.m;
            l.k = q.k;
            l.stride = q.stride;
            l.groups = q.groups;
            b.layers.push_back(std::move(l));
        }
        g.blocks.push_back(std::move(b));
    }
    return g;
}

ir::BitWidthMap bit_widths_of(const QNetModel& model) {
    ir::BitWidthMap map;
    map.default_bw = model.bw;
    for (const auto& b : model.blocks)
        for (const auto& q : b.layers)
            if (q.is_weighted())
                map.per_layer[q.name] = q.weight_spec.bw;
    return map;
}

} // namespace qnet::frontend
