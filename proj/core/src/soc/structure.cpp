// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/structure.hpp"

#include <algorithm>
#include <array>

#include "qnet/error.hpp"

namespace qnet::soc {

using ir::BlockKind;
using ir::LayerKind;
using ir::LayerRole;

PlanInput plan_input(const frontend::QNetModel& model) {
    PlanInput in;
    in.graph = frontend::structure_of(model);
    in.weight_bw = frontend::bit_widths_of(model);
    in.input_bw = model.input_spec.bw;
    in.activation_bw = model.bw;
    in.resolution = model.input_resolution;
    return in;
}

PlanInput plan_input(const ir::NetworkGraph& graph, int bw, int first_conv_bw, int input_bw, int resolution) {
    PlanInput in;
    in.graph = graph;
    for (auto& block : in.graph.blocks) {
        // Shape-only view: drop any parameters along with the fused layers.
        std::erase_if(block.layers, [](const ir::Layer& l) {
            return l.kind == LayerKind::BatchNorm || l.kind == LayerKind::Relu6 || l.kind == LayerKind::HardSigmoid;
        });
        for (auto& l : block.layers) {
            l.weights = {};
            l.bias.clear();
        }
    }
    in.weight_bw = ir::BitWidthMap::standard(in.graph, bw, first_conv_bw);
    in.input_bw = input_bw;
    in.activation_bw = bw;
    in.resolution = resolution > 0 ? resolution : graph.input_resolution;
    return in;
}

OpType op_type(LayerKind kind, LayerRole role) {
    switch (kind) {
    case LayerKind::NormalConv: return OpType::NormalConv;
    case LayerKind::DepthwiseConv: return OpType::Depthwise;
    case LayerKind::Dense: return OpType::Dense;
    case LayerKind::AvgPool: return OpType::AvgPool;
    case LayerKind::SqueezeExcite: return OpType::SeScale;
    case LayerKind::ResidualAdd: return OpType::ResidualAdd;
    case LayerKind::PointwiseConv:
        switch (role) {
        case LayerRole::Expand: return OpType::ExpandPw;
        case LayerRole::Project: return OpType::ProjectPw;
        case LayerRole::SeSqueeze: return OpType::SeSqueeze;
        case LayerRole::SeExcite: return OpType::SeExcite;
        default: return OpType::Pointwise;
        }
    default: break;
    }
    throw PlanError("layer kind '" + std::string(ir::to_string(kind)) + "' has no hardware operator");
}

namespace {

// Body slot order; every role occurs at most once per block.
constexpr std::array kBodyRoles = {LayerRole::Expand,    LayerRole::Depthwise, LayerRole::SePool,
                                   LayerRole::SeSqueeze, LayerRole::SeExcite,  LayerRole::SeScale,
                                   LayerRole::Project,   LayerRole::Residual};

bool is_tail_block(const ir::Block& b) {
    if (b.kind != BlockKind::Plain || b.layers.empty())
        return false;
    return std::all_of(b.layers.begin(), b.layers.end(), [](const ir::Layer& l) {
        return l.kind == LayerKind::PointwiseConv || l.kind == LayerKind::AvgPool;
    });
}

bool is_classifier_block(const ir::Block& b) {
    return b.kind == BlockKind::Plain && b.layers.size() == 1 && b.layers[0].kind == LayerKind::Dense;
}

bool is_head_block(const ir::Block& b) {
    if (b.kind == BlockKind::InvertedResidual)
        return true;
    return !b.layers.empty() && std::all_of(b.layers.begin(), b.layers.end(), [](const ir::Layer& l) {
        return l.kind == LayerKind::NormalConv || l.kind == LayerKind::DepthwiseConv ||
               l.kind == LayerKind::PointwiseConv;
    });
}

std::string describe(const ir::NetworkGraph& g, std::size_t b) {
    std::string s = "block " + std::to_string(b) + " (";
    for (std::size_t i = 0; i < g.blocks[b].layers.size(); ++i)
        s += (i ? " " : "") + g.blocks[b].layers[i].name;
    return s + ")";
}

struct Builder {
    const PlanInput& in;
    std::vector<std::vector<LayerRole>> roles;
    std::vector<std::vector<ir::LayerGeometry>> geo;
    HardwarePlan plan;

    LayerParams params(std::size_t b, std::size_t i, int slot) const {
        const ir::Layer& l = in.graph.blocks[b].layers[i];
        LayerParams p;
        p.block = b;
        p.layer = i;
        p.name = l.name;
        p.slot = slot;
        p.n = l.n;
        p.m = l.m;
        p.k = l.k;
        p.stride = l.stride;
        p.groups = l.groups;
        p.in = geo[b][i].in;
        p.out = geo[b][i].out;
        if (l.is_weighted())
            p.weight_bw = in.weight_bw.at(l.name);
        p.in_bw = (b == 0 && i == 0) ? in.input_bw : in.activation_bw;
        if (l.kind == LayerKind::Dense)
            p.out_bw = 32;
        else if (roles[b][i] == LayerRole::SeExcite)
            p.out_bw = frontend::kGateBitWidth;
        else
            p.out_bw = in.activation_bw;
        return p;
    }

    Invocation& start(CuKind cu, int repeat) {
        Invocation& inv = plan.invocations.emplace_back();
        inv.index = static_cast<int>(plan.invocations.size()) - 1;
        inv.cu = cu;
        inv.repeat = repeat;
        return inv;
    }

    void finish(Invocation& inv) {
        for (std::size_t b : inv.blocks) {
            inv.residual |= in.graph.blocks[b].residual;
            for (LayerRole r : roles[b])
                inv.squeeze_excite |= r == LayerRole::SeScale;
        }
        inv.in = inv.layers.front().in;
        inv.out = inv.layers.back().out;
    }

    // One slot per layer, in order (Head, Tail, Classifier).
    void sequential_cu(CuKind kind, std::size_t begin, std::size_t end) {
        if (begin == end)
            return;
        ComputeUnitPlan cu;
        cu.kind = kind;
        Invocation& inv = start(kind, 0);
        for (std::size_t b = begin; b < end; ++b) {
            inv.blocks.push_back(b);
            for (std::size_t i = 0; i < in.graph.blocks[b].layers.size(); ++i) {
                const ir::Layer& l = in.graph.blocks[b].layers[i];
                OperatorSlot s;
                s.type = op_type(l.kind, roles[b][i]);
                inv.layers.push_back(params(b, i, static_cast<int>(cu.slots.size())));
                cu.slots.push_back(s);
            }
        }
        finish(inv);
        plan.cus.push_back(std::move(cu));
    }

    void body_cu(std::size_t begin, std::size_t end) {
        std::array<int, kBodyRoles.size()> seen{};
        for (std::size_t b = begin; b < end; ++b) {
            std::array<int, kBodyRoles.size()> here{};
            for (std::size_t i = 0; i < roles[b].size(); ++i) {
                const auto it = std::find(kBodyRoles.begin(), kBodyRoles.end(), roles[b][i]);
                if (it == kBodyRoles.end() || ++here[it - kBodyRoles.begin()] > 1)
                    throw PlanError(describe(in.graph, b) + " does not fit the Body template");
            }
            for (std::size_t r = 0; r < here.size(); ++r)
                seen[r] += here[r];
        }
        ComputeUnitPlan cu;
        cu.kind = CuKind::Body;
        std::array<int, kBodyRoles.size()> slot_of{};
        const int count = static_cast<int>(end - begin);
        for (std::size_t r = 0; r < kBodyRoles.size(); ++r) {
            slot_of[r] = -1;
            if (!seen[r])
                continue;
            // Find a representative layer for the operator type.
            for (std::size_t b = begin; b < end && slot_of[r] < 0; ++b)
                for (std::size_t i = 0; i < roles[b].size(); ++i)
                    if (roles[b][i] == kBodyRoles[r]) {
                        OperatorSlot s;
                        s.type = op_type(in.graph.blocks[b].layers[i].kind, kBodyRoles[r]);
                        s.always_present = seen[r] == count;
                        slot_of[r] = static_cast<int>(cu.slots.size());
                        cu.slots.push_back(s);
                        break;
                    }
        }
        for (std::size_t b = begin; b < end; ++b) {
            Invocation& inv = start(CuKind::Body, static_cast<int>(b - begin));
            inv.blocks.push_back(b);
            for (std::size_t i = 0; i < roles[b].size(); ++i) {
                const auto r = std::find(kBodyRoles.begin(), kBodyRoles.end(), roles[b][i]) - kBodyRoles.begin();
                inv.layers.push_back(params(b, i, slot_of[r]));
            }
            finish(inv);
        }
        plan.cus.push_back(std::move(cu));
    }
};

} // namespace

std::string block_signature(const ir::Block& block) {
    std::string s = block.kind == BlockKind::InvertedResidual ? "irb" : "plain";
    bool in_se = false;
    for (const auto& l : block.layers) {
        if (l.kind == LayerKind::AvgPool && block.kind == BlockKind::InvertedResidual)
            in_se = true;
        const bool skip = in_se || l.kind == LayerKind::ResidualAdd || l.kind == LayerKind::BatchNorm ||
                          l.kind == LayerKind::Relu6 || l.kind == LayerKind::HardSigmoid;
        if (l.kind == LayerKind::SqueezeExcite)
            in_se = false;
        if (!skip)
            s += ":" + std::string(ir::to_string(l.kind));
    }
    return s;
}

BlockRun longest_isomorphic_run(const ir::NetworkGraph& graph) {
    BlockRun best;
    std::size_t b = 0;
    while (b < graph.blocks.size()) {
        if (graph.blocks[b].kind != BlockKind::InvertedResidual) {
            ++b;
            continue;
        }
        const std::string sig = block_signature(graph.blocks[b]);
        std::size_t e = b + 1;
        while (e < graph.blocks.size() && graph.blocks[e].kind == BlockKind::InvertedResidual &&
               block_signature(graph.blocks[e]) == sig)
            ++e;
        if (e - b > best.length)
            best = {b, e - b};
        b = e;
    }
    return best;
}

HardwarePlan partition_to_cus(const PlanInput& input) {
    const ir::NetworkGraph& g = input.graph;
    for (const auto& block : g.blocks)
        for (const auto& l : block.layers)
            if (l.kind == LayerKind::BatchNorm || l.kind == LayerKind::Relu6 || l.kind == LayerKind::HardSigmoid)
                throw PlanError("layer '" + l.name + "' must be fused before planning");
    ir::validate(g);

    Builder bld{input, ir::infer_roles(g), ir::propagate_shapes(g, input.resolution), {}};
    bld.plan.arch_name = g.arch_name;
    bld.plan.alpha = g.alpha;
    bld.plan.resolution = input.resolution;
    bld.plan.input_bw = input.input_bw;
    bld.plan.activation_bw = input.activation_bw;

    const BlockRun run = longest_isomorphic_run(g);
    if (run.length == 0)
        throw PlanError("graph has no inverted-residual block to map onto the Body compute unit");
    const std::size_t body_end = run.begin + run.length;
    for (std::size_t b = 0; b < run.begin; ++b)
        if (!is_head_block(g.blocks[b]))
            throw PlanError(describe(g, b) + " matches no compute-unit template");
    std::size_t tail_end = body_end;
    while (tail_end < g.blocks.size() && is_tail_block(g.blocks[tail_end]))
        ++tail_end;
    std::size_t cls_end = tail_end;
    if (cls_end < g.blocks.size() && is_classifier_block(g.blocks[cls_end]))
        ++cls_end;
    if (cls_end != g.blocks.size())
        throw PlanError(describe(g, cls_end) + " matches no compute-unit template");

    bld.sequential_cu(CuKind::Head, 0, run.begin);
    bld.body_cu(run.begin, body_end);
    bld.sequential_cu(CuKind::Tail, body_end, tail_end);
    bld.sequential_cu(CuKind::Classifier, tail_end, cls_end);
    bld.plan.has_classifier = cls_end != tail_end;
    return std::move(bld.plan);
}

} // namespace qnet::soc
