// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

// Fixture generator: exports the case-study networks as manifests (shape
// only, or with seeded random weights) and writes random input datasets.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "qnet/error.hpp"
#include "qnet/ir/blob.hpp"
#include "qnet/ir/manifest.hpp"
#include "qnet/ir/zoo.hpp"
#include "qnet/random.hpp"

namespace fs = std::filesystem;
using namespace qnet;

namespace {

std::string alpha_tag(double alpha) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "a%03d", static_cast<int>(alpha * 100 + 0.5));
    return buf;
}

ir::NetworkGraph build(const std::string& network, double alpha, const ir::zoo::BuildOptions& opts) {
    if (network == "mobilenet_v2")
        return ir::zoo::mobilenet_v2(alpha, opts);
    if (network == "efficientnet")
        return ir::zoo::efficientnet_compressed(opts);
    if (network == "toy")
        return ir::zoo::toy_network({}, opts);
    if (network == "toy_se") {
        ir::zoo::ToyOptions t;
        t.irb_count = 3;
        t.squeeze_excite = true;
        return ir::zoo::toy_network(t, opts);
    }
    throw Error("unknown network '" + network + "' (mobilenet_v2, efficientnet, toy, toy_se)");
}

std::string file_name(const std::string& network, double alpha) {
    return network == "mobilenet_v2" ? network + "_" + alpha_tag(alpha) + ".json" : network + ".json";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qnet_fixtures: manifests and datasets for the case-study networks", "qnet_fixtures"};
    app.require_subcommand(1);
    std::string out = ".";
    app.add_option("--out", out, "Output directory")->capture_default_str();

    auto* shapes = app.add_subcommand("shapes", "Shape-only manifests of every case-study network at 224");

    std::string network = "mobilenet_v2";
    double alpha = 1.0;
    int resolution = 224;
    std::uint64_t seed = 1;
    auto* weighted = app.add_subcommand("weighted", "One network with seeded random weights");
    weighted->add_option("--network", network, "mobilenet_v2, efficientnet, toy or toy_se")->capture_default_str();
    weighted->add_option("--alpha", alpha, "Width multiplier (mobilenet_v2)")->capture_default_str();
    weighted->add_option("--resolution", resolution, "Input resolution")->capture_default_str();
    weighted->add_option("--seed", seed, "Weight seed")->capture_default_str();

    int channels = 3, count = 4;
    auto* dataset = app.add_subcommand("dataset", "Random f32 input blobs in [-1, 1)");
    dataset->add_option("--channels", channels)->capture_default_str();
    dataset->add_option("--resolution", resolution)->capture_default_str();
    dataset->add_option("--count", count)->capture_default_str();
    dataset->add_option("--seed", seed)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out);
        if (*shapes) {
            for (double a : {1.0, 0.75, 0.5, 0.35}) {
                const auto p = fs::path(out) / file_name("mobilenet_v2", a);
                ir::save_model(ir::zoo::mobilenet_v2(a), p);
                std::cout << p.string() << "\n";
            }
            for (const char* n : {"efficientnet", "toy"}) {
                const auto p = fs::path(out) / file_name(n, 1.0);
                ir::save_model(build(n, 1.0, {}), p);
                std::cout << p.string() << "\n";
            }
        } else if (*weighted) {
            const auto p = fs::path(out) / file_name(network, alpha);
            ir::save_model(build(network, alpha, {resolution, true, seed}), p);
            std::cout << p.string() << "\n";
        } else if (*dataset) {
            Rng rng(seed);
            const auto n = static_cast<std::size_t>(channels) * resolution * resolution;
            for (int i = 0; i < count; ++i) {
                std::vector<float> v(n);
                for (auto& x : v)
                    x = static_cast<float>(rng.uniform(-1.0, 1.0));
                char name[32];
                std::snprintf(name, sizeof name, "input_%04d.bin", i);
                ir::write_blob(fs::path(out) / name, v);
            }
            std::cout << count << " inputs in " << out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "qnet_fixtures: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
