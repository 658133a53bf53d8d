// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "qnet/ir/graph.hpp"

// Builders for the reference networks used by tests, benchmarks and the
// fixture generator. Weighted variants carry random (untrained) parameters
// drawn from a seeded generator.

namespace qnet::ir::zoo {

struct BuildOptions {
    int resolution = 224;
    /// Fill filters, biases and batch-norm statistics.
    bool weighted = false;
    std::uint64_t seed = 1;
};

/// MobileNet-V2: stem conv, 17 inverted residual blocks, 1x1 tail conv,
/// global pool and a 1000-way dense classifier.
NetworkGraph mobilenet_v2(double alpha, const BuildOptions& opts = {});

/// EfficientNet-B0 compressed to width 0.5 with stage repeats
/// (1,1,1,2,2,2,1): 10 inverted residual blocks with squeeze-excite,
/// ReLU6 activations and a hard-sigmoid gate. No classifier.
NetworkGraph efficientnet_compressed(const BuildOptions& opts = {});

struct ToyOptions {
    int irb_count = 1;
    int stem_channels = 8;
    int irb_channels = 8;
    int expansion = 2;
    int kernel = 3;
    bool squeeze_excite = false;
    int tail_channels = 16;
    /// Classifier output width; nullopt drops the dense layer.
    std::optional<int> classes = 10;
};

/// Small network: stem conv, `irb_count` inverted residual blocks (first
/// one strided), tail conv, pool and optional classifier.
NetworkGraph toy_network(const ToyOptions& toy, const BuildOptions& opts);

/// Fills every weighted layer and batch-norm with seeded random values.
void randomize_parameters(NetworkGraph& graph, std::uint64_t seed);

} // namespace qnet::ir::zoo
