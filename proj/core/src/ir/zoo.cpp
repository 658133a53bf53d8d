// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/ir/zoo.hpp"

#include <cmath>
#include <string>

#include "qnet/ir/counting.hpp"
#include "qnet/random.hpp"

namespace qnet::ir::zoo {

namespace {

struct StageConfig {
    int expansion;
    int channels;
    int repeats;
    int stride;
    int kernel;
};

class Builder {
public:
    Builder(std::string arch, int resolution, int input_channels) {
        g_.arch_name = std::move(arch);
        g_.input_resolution = resolution;
        g_.input_channels = input_channels;
        cur_ = input_channels;
    }

    NetworkGraph finish() { return std::move(g_); }

    void begin(BlockKind kind) {
        g_.blocks.push_back(Block{kind, false, {}});
        prefix_ = "b" + std::to_string(g_.blocks.size() - 1) + ".";
    }

    void conv(LayerKind kind, const std::string& name, int m, int k = 1, int stride = 1) {
        Layer l;
        l.name = prefix_ + name;
        l.kind = kind;
        l.n = cur_;
        l.m = kind == LayerKind::DepthwiseConv ? cur_ : m;
        l.k = k;
        l.stride = stride;
        l.groups = kind == LayerKind::DepthwiseConv ? cur_ : 1;
        push(std::move(l));
    }

    void unary(LayerKind kind, const std::string& name) {
        Layer l;
        l.name = prefix_ + name;
        l.kind = kind;
        l.n = l.m = cur_;
        push(std::move(l));
    }

    void dense(int classes) {
        Layer l;
        l.name = prefix_ + "fc";
        l.kind = LayerKind::Dense;
        l.n = cur_;
        l.m = classes;
        push(std::move(l));
    }

    void stem(int channels, int k = 3) {
        begin(BlockKind::Plain);
        conv(LayerKind::NormalConv, "conv", channels, k, 2);
        unary(LayerKind::BatchNorm, "bn");
        unary(LayerKind::Relu6, "relu");
    }

    void irb(int expansion, int out, int stride, int k, int se_channels) {
        begin(BlockKind::InvertedResidual);
        const int in = cur_;
        if (expansion != 1) {
            conv(LayerKind::PointwiseConv, "expand", in * expansion);
            unary(LayerKind::BatchNorm, "expand_bn");
            unary(LayerKind::Relu6, "expand_relu");
        }
        conv(LayerKind::DepthwiseConv, "dw", 0, k, stride);
        unary(LayerKind::BatchNorm, "dw_bn");
        unary(LayerKind::Relu6, "dw_relu");
        if (se_channels > 0) {
            const int hidden = cur_;
            unary(LayerKind::AvgPool, "se_pool");
            conv(LayerKind::PointwiseConv, "se_squeeze", se_channels);
            unary(LayerKind::Relu6, "se_relu");
            conv(LayerKind::PointwiseConv, "se_excite", hidden);
            unary(LayerKind::HardSigmoid, "se_gate");
            Layer scale;
            scale.name = prefix_ + "se_scale";
            scale.kind = LayerKind::SqueezeExcite;
            scale.n = scale.m = hidden;
            push(std::move(scale));
        }
        conv(LayerKind::PointwiseConv, "project", out);
        unary(LayerKind::BatchNorm, "project_bn");
        if (stride == 1 && in == out) {
            g_.blocks.back().residual = true;
            unary(LayerKind::ResidualAdd, "add");
        }
    }

    void tail(int channels, std::optional<int> classes) {
        begin(BlockKind::Plain);
        conv(LayerKind::PointwiseConv, "conv", channels);
        unary(LayerKind::BatchNorm, "bn");
        unary(LayerKind::Relu6, "relu");
        begin(BlockKind::Plain);
        unary(LayerKind::AvgPool, "pool");
        if (classes) {
            begin(BlockKind::Plain);
            dense(*classes);
        }
    }

    int channels() const { return cur_; }

private:
    void push(Layer l) {
        cur_ = l.m;
        g_.blocks.back().layers.push_back(std::move(l));
    }

    NetworkGraph g_;
    std::string prefix_;
    int cur_ = 0;
};

NetworkGraph finalize(NetworkGraph g, double alpha, const BuildOptions& opts) {
    validate(g);
    g = apply_width_multiplier(g, alpha);
    g.input_resolution = opts.resolution;
    if (opts.weighted)
        randomize_parameters(g, opts.seed);
    validate(g);
    return g;
}

} // namespace

NetworkGraph mobilenet_v2(double alpha, const BuildOptions& opts) {
    static constexpr StageConfig kStages[] = {
        {1, 16, 1, 1, 3}, {6, 24, 2, 2, 3}, {6, 32, 3, 2, 3}, {6, 64, 4, 2, 3},
        {6, 96, 3, 1, 3}, {6, 160, 3, 2, 3}, {6, 320, 1, 1, 3},
    };
    Builder b("mobilenet-v2", opts.resolution, 3);
    b.stem(32);
    for (const auto& s : kStages)
        for (int r = 0; r < s.repeats; ++r)
            b.irb(s.expansion, s.channels, r == 0 ? s.stride : 1, s.kernel, 0);
    b.tail(1280, 1000);
    NetworkGraph g = b.finish();
    g.tail_min_width = true;
    return finalize(std::move(g), alpha, opts);
}

NetworkGraph efficientnet_compressed(const BuildOptions& opts) {
    static constexpr StageConfig kStages[] = {
        {1, 16, 1, 1, 3}, {6, 24, 1, 2, 3}, {6, 40, 1, 2, 5}, {6, 80, 2, 2, 3},
        {6, 112, 2, 1, 5}, {6, 192, 2, 2, 5}, {6, 320, 1, 1, 3},
    };
    Builder b("efficientnet-compressed", opts.resolution, 3);
    b.stem(32);
    for (const auto& s : kStages)
        for (int r = 0; r < s.repeats; ++r)
            b.irb(s.expansion, s.channels, r == 0 ? s.stride : 1, s.kernel, std::max(1, b.channels() / 4));
    b.tail(1280, std::nullopt);
    return finalize(b.finish(), 0.5, opts);
}

NetworkGraph toy_network(const ToyOptions& toy, const BuildOptions& opts) {
    Builder b("toy", opts.resolution, 3);
    b.stem(toy.stem_channels);
    for (int i = 0; i < toy.irb_count; ++i)
        b.irb(toy.expansion, toy.irb_channels, i == 0 ? 2 : 1, toy.kernel,
              toy.squeeze_excite ? std::max(1, b.channels() / 4) : 0);
    b.tail(toy.tail_channels, toy.classes);
    return finalize(b.finish(), 1.0, opts);
}

void randomize_parameters(NetworkGraph& graph, std::uint64_t seed) {
    Rng rng(seed);
    auto fill = [&](std::vector<float>& v, std::size_t n, double lo, double hi) {
        v.resize(n);
        for (auto& x : v)
            x = static_cast<float>(rng.uniform(lo, hi));
    };
    for (auto& block : graph.blocks) {
        for (auto& l : block.layers) {
            if (l.is_weighted()) {
                const double fan_in = static_cast<double>(l.n / l.groups) * l.k * l.k;
                const double bound = std::sqrt(3.0 / fan_in);
                std::vector<float> w;
                fill(w, l.weight_count(), -bound, bound);
                l.weights = FloatTensor(l.weight_dims(), std::move(w));
                // Convolutions followed by batch-norm carry no bias of their own.
                const bool biased = l.kind == LayerKind::Dense || l.name.find("se_") != std::string::npos;
                if (biased)
                    fill(l.bias, l.m, -0.1, 0.1);
                else
                    l.bias.clear();
            } else if (l.kind == LayerKind::BatchNorm) {
                fill(l.bn.gamma, l.m, 0.5, 1.5);
                fill(l.bn.beta, l.m, 0.0, 0.5);
                fill(l.bn.mean, l.m, -0.1, 0.1);
                fill(l.bn.var, l.m, 0.5, 1.5);
            }
        }
    }
}

} // namespace qnet::ir::zoo
