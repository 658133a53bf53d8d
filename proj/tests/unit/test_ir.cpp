// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "qnet/error.hpp"
#include "qnet/ir/counting.hpp"
#include "qnet/ir/manifest.hpp"
#include "qnet/ir/zoo.hpp"
#include "support/generators.hpp"
#include "support/models.hpp"
#include "support/temp_dir.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

ir::NetworkGraph single_layer(ir::Layer l, int resolution) {
    ir::NetworkGraph g;
    g.arch_name = "single";
    g.input_resolution = resolution;
    g.input_channels = l.n;
    ir::Block b;
    b.layers.push_back(std::move(l));
    g.blocks.push_back(std::move(b));
    return g;
}

ir::Layer conv(ir::LayerKind kind, int n, int m, int k, int stride = 1, int groups = 1) {
    ir::Layer l;
    l.name = "l";
    l.kind = kind;
    l.n = n;
    l.m = m;
    l.k = k;
    l.stride = stride;
    l.groups = groups;
    return l;
}

int count_kind(const ir::NetworkGraph& g, ir::LayerKind kind) {
    int n = 0;
    for (const auto& b : g.blocks)
        for (const auto& l : b.layers)
            n += l.kind == kind ? 1 : 0;
    return n;
}

} // namespace

TEST_CASE("make_divisible rounds to multiples of eight") {
    CHECK(ir::make_divisible(32 * 0.5) == 16);
    CHECK(ir::make_divisible(24 * 0.35) == 8);
    CHECK(ir::make_divisible(3.0) == 8);
    CHECK(ir::make_divisible(12.0) == 16); // ties go up
    CHECK(ir::make_divisible(8.5) == 8);
    CHECK(ir::make_divisible(11.9) == 16); // 8 would drop more than 10%
    CHECK(ir::make_divisible(96 * 0.35) == 32);
    // Rounding 20 down to 16 would drop 20%; bump one step.
    CHECK(ir::make_divisible(19.9) == 16 + 8);
}

TEST_CASE("shipped MobileNet-V2 manifest has the expected structure") {
    const auto g = ir::load_model(model_path("mobilenet_v2_a100.json"));
    int irbs = 0, plain = 0;
    for (const auto& b : g.blocks)
        (b.kind == ir::BlockKind::InvertedResidual ? irbs : plain) += 1;
    CHECK(irbs == 17);
    CHECK(count_kind(g, ir::LayerKind::Dense) == 1);
    CHECK(count_kind(g, ir::LayerKind::AvgPool) == 1);
    CHECK(g.blocks.front().layers.front().kind == ir::LayerKind::NormalConv);
    CHECK(g.blocks.front().layers.front().m == 32);
}

TEST_CASE("parameter counts follow the direct formula") {
    auto l = conv(ir::LayerKind::PointwiseConv, 2, 3, 1);
    auto g = single_layer(l, 8);
    ir::BitWidthMap bw;
    bw.default_bw = 4;
    CHECK(ir::count_params_bits(g, bw) == (2 * 3 + 3) * 4);
    bw.per_layer["l"] = 8;
    CHECK(ir::count_params_bits(g, bw) == (2 * 3 + 3) * 8);
}

TEST_CASE("op counts follow the direct formula") {
    auto g = single_layer(conv(ir::LayerKind::NormalConv, 2, 5, 3), 4);
    CHECK(ir::count_ops(g, 4) == 4u * 4 * 9 * 2 * 5);
    // Grouping divides the work by G.
    auto grouped = single_layer(conv(ir::LayerKind::NormalConv, 4, 8, 3, 1, 2), 4);
    auto full = single_layer(conv(ir::LayerKind::NormalConv, 4, 8, 3, 1, 1), 4);
    CHECK(ir::count_ops(grouped, 4) * 2 == ir::count_ops(full, 4));
    // Stride 2 with same padding: ceil(5 / 2) = 3.
    auto strided = single_layer(conv(ir::LayerKind::DepthwiseConv, 3, 3, 3, 2, 3), 5);
    CHECK(ir::count_ops(strided, 5) == 3u * 3 * 9 * 3);
}

TEST_CASE("published MobileNet-V2 design-space figures are matched") {
    const char* files[] = {"mobilenet_v2_a100.json", "mobilenet_v2_a075.json", "mobilenet_v2_a050.json",
                           "mobilenet_v2_a035.json"};
    const double params_mb[] = {13.31, 10.01, 7.48, 6.37};
    const double ops_224[] = {313.621, 220.326, 104.164, 64.835};
    for (int a = 0; a < 4; ++a) {
        CAPTURE(files[a]);
        const auto g = ir::load_model(model_path(files[a]));
        const auto bw = ir::BitWidthMap::standard(g);
        const double mb = static_cast<double>(ir::count_params_bits(g, bw)) / ir::kBitsPerMb;
        CHECK(std::abs(mb - params_mb[a]) <= 0.05 * params_mb[a]);
        const double ops = static_cast<double>(ir::count_ops(g, 224)) / 1e6;
        CHECK(std::abs(ops - ops_224[a]) <= 0.10 * ops_224[a]);
    }
}

TEST_CASE("params are invariant in H while ops grow strictly in H and alpha") {
    const auto base = ir::load_model(model_path("mobilenet_v2_a100.json"));
    std::uint64_t prev_alpha_ops = 0;
    for (double alpha : {0.35, 0.5, 0.75, 1.0}) {
        const auto g = ir::apply_width_multiplier(base, alpha);
        const auto bw = ir::BitWidthMap::standard(g);
        const auto params = ir::count_params_bits(g, bw);
        std::uint64_t prev = 0;
        for (int h : {96, 128, 160, 192, 224}) {
            auto at_h = g;
            at_h.input_resolution = h;
            CHECK(ir::count_params_bits(at_h, bw) == params);
            const auto ops = ir::count_ops(g, h);
            CHECK(ops > prev);
            prev = ops;
        }
        CHECK(ir::count_ops(g, 224) > prev_alpha_ops);
        prev_alpha_ops = ir::count_ops(g, 224);
    }
}

TEST_CASE("shipped width variants equal the width multiplier applied to the base") {
    const auto base = ir::load_model(model_path("mobilenet_v2_a100.json"));
    CHECK(ir::apply_width_multiplier(base, 1.0) == base);
    CHECK(ir::apply_width_multiplier(base, 0.5) == ir::load_model(model_path("mobilenet_v2_a050.json")));
    CHECK(ir::apply_width_multiplier(base, 0.35) == ir::load_model(model_path("mobilenet_v2_a035.json")));
    CHECK(base.blocks.front().layers.front().m == 32);
    CHECK(ir::apply_width_multiplier(base, 0.5).blocks.front().layers.front().m == 16);
}

TEST_CASE("width multiplier rejects invalid inputs") {
    const auto base = ir::load_model(model_path("mobilenet_v2_a100.json"));
    CHECK_THROWS_AS(ir::apply_width_multiplier(base, 0.0), ShapeError);
    CHECK_THROWS_AS(ir::apply_width_multiplier(base, 1.5), ShapeError);
    CHECK_THROWS_AS(ir::apply_width_multiplier(ir::apply_width_multiplier(base, 0.5), 0.5), ShapeError);
    const auto weighted = ir::zoo::toy_network({}, {16, true, 3});
    CHECK_THROWS_AS(ir::apply_width_multiplier(weighted, 0.5), ShapeError);
}

TEST_CASE("network complexity is the product of size and ops") {
    CHECK(ir::network_complexity(0, 12345) == 0.0);
    CHECK(ir::network_complexity(10, 20) == ir::network_complexity(20, 10));
    const auto g = ir::load_model(model_path("mobilenet_v2_a100.json"));
    const auto bw = ir::BitWidthMap::standard(g);
    CHECK(ir::network_complexity(g, bw, 224) ==
          doctest::Approx(static_cast<double>(ir::count_params_bits(g, bw)) * ir::count_ops(g, 224)));
}

TEST_CASE("shape propagation halves resolution on stride 2 with ceiling") {
    const auto g = ir::load_model(model_path("mobilenet_v2_a100.json"));
    const auto geo = ir::propagate_shapes(g, 224);
    CHECK(geo.front().front().out == ir::FeatureShape{32, 112, 112});
    // Five stride-2 stages take 224 to 7 before the pool.
    bool saw_seven = false;
    for (const auto& block : geo)
        for (const auto& l : block)
            saw_seven = saw_seven || (l.out.h == 7 && l.out.c == 1280);
    CHECK(saw_seven);
    const auto odd = ir::propagate_shapes(g, 97);
    CHECK(odd.front().front().out.h == 49);
}

TEST_CASE("manifests round-trip byte for byte") {
    TempDir dir;
    for (const char* f : {"mobilenet_v2_a035.json", "efficientnet.json", "toy.json"}) {
        CAPTURE(f);
        const auto src = model_path(f);
        const auto g = ir::load_model(src);
        const auto out = dir / f;
        ir::save_model(g, out);
        CHECK(read_file(out) == read_file(src));
        CHECK(ir::load_model(out) == g);
    }
    // Weighted graphs also round-trip their blobs.
    const auto weighted = ir::zoo::toy_network({}, {16, true, 8});
    const auto path = dir / "weighted.json";
    ir::save_model(weighted, path);
    const auto back = ir::load_model(path);
    CHECK(back == weighted);
    std::filesystem::create_directories(dir / "again");
    ir::save_model(back, dir / "again/weighted.json");
    CHECK(read_file(path) == read_file(dir / "again/weighted.json"));
}

TEST_CASE("malformed manifests are rejected") {
    TempDir dir;
    const auto base = read_file(model_path("toy.json"));
    auto expect_error = [&](const std::string& text, const std::string& fragment) {
        const auto p = dir / "bad.json";
        write_file(p, text);
        std::string msg;
        try {
            ir::load_model(p);
        } catch (const Error& e) {
            msg = e.what();
        }
        CAPTURE(msg);
        CHECK(msg.find(fragment) != std::string::npos);
    };
    expect_error("{ not json", "malformed");
    expect_error(R"({"format_version": 1, "arch_name": "x", "alpha": 1.0, "input_resolution": 8,
                   "input_channels": 3, "layers": []})",
                 "no layers");
    // A pointwise layer with K = 3.
    auto pw = base;
    const auto at = pw.find("\"pointwise-conv\"");
    REQUIRE(at != std::string::npos);
    const auto k = pw.find("\"K\": 1", at);
    pw.replace(k, 6, "\"K\": 3");
    expect_error(pw, "pointwise requires K=1");
    // Producer M does not match consumer N.
    auto edge = base;
    const auto n = edge.find("\"N\": 8");
    edge.replace(n, 6, "\"N\": 9");
    expect_error(edge, "dangling edge");
    CHECK_THROWS_AS(ir::load_model(dir / "missing.json"), ManifestError);
}

TEST_CASE("blob size mismatches are rejected") {
    TempDir dir;
    const auto path = dir / "w.json";
    ir::save_model(ir::zoo::toy_network({}, {16, true, 2}), path);
    const auto blobs = dir.path() / ir::blob_dir_for(path);
    REQUIRE(std::filesystem::exists(blobs));
    const auto first = *std::filesystem::directory_iterator(blobs);
    std::filesystem::resize_file(first.path(), std::filesystem::file_size(first.path()) - 4);
    CHECK_THROWS_AS(ir::load_model(path), ManifestError);
}

TEST_CASE("residual flag requires equal block input and output shapes") {
    auto g = ir::zoo::toy_network({}, {16, false, 1});
    ir::validate(g);
    for (auto& b : g.blocks) {
        if (b.kind != ir::BlockKind::InvertedResidual)
            continue;
        ir::Layer add;
        add.name = "bad_add";
        add.kind = ir::LayerKind::ResidualAdd;
        add.n = add.m = b.layers.back().m;
        b.layers.push_back(add);
        b.residual = true;
        break;
    }
    // The first toy block is strided, so the residual is illegal.
    CHECK_THROWS(ir::validate(g));
}

TEST_CASE("group convolution requires divisible channel counts") {
    auto g = single_layer(conv(ir::LayerKind::NormalConv, 4, 6, 3, 1, 4), 8);
    CHECK_THROWS(ir::validate(g));
    g = single_layer(conv(ir::LayerKind::NormalConv, 4, 8, 3, 1, 4), 8);
    CHECK_NOTHROW(ir::validate(g));
}
