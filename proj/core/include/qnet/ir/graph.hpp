// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qnet/ir/tensor.hpp"

namespace qnet::ir {

enum class LayerKind {
    NormalConv, // includes group convolution (groups > 1)
    DepthwiseConv,
    PointwiseConv,
    BatchNorm,
    Relu6,
    HardSigmoid,
    AvgPool, // global average pooling
    ResidualAdd,
    SqueezeExcite, // channel-wise gating multiply closing an SE branch
    Dense,
};

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

struct BatchNormParams {
    std::vector<float> gamma;
    std::vector<float> beta;
    std::vector<float> mean;
    std::vector<float> var;
    double eps = 1e-5;

    bool operator==(const BatchNormParams&) const = default;
};

/// One operator of the network. Channel counts follow the usual naming:
/// n = input channels, m = output channels, k = square kernel size,
/// groups = 1 for normal convolution and n for depthwise.
struct Layer {
    std::string name;
    LayerKind kind = LayerKind::NormalConv;
    int n = 0;
    int m = 0;
    int k = 1;
    int stride = 1;
    int groups = 1;

    FloatTensor weights;    // [m, n/groups, k, k]; empty for shape-only graphs
    std::vector<float> bias; // length m or empty
    BatchNormParams bn;      // BatchNorm only

    /// Convolutions and dense layers carry filters.
    bool is_weighted() const;
    bool is_conv() const;
    bool has_weights() const { return !weights.empty(); }
    std::vector<int> weight_dims() const;
    std::size_t weight_count() const;

    bool operator==(const Layer&) const = default;
};

enum class BlockKind { Plain, InvertedResidual };

struct Block {
    BlockKind kind = BlockKind::Plain;
    bool residual = false;
    std::vector<Layer> layers;

    bool operator==(const Block&) const = default;
};

/// Structural role of a layer inside its block, inferred from the layer
/// sequence. Drives compute-unit templates and reporting.
enum class LayerRole {
    Conv,        // plain-block normal convolution (stem)
    TailConv,    // plain-block pointwise
    Pool,        // plain-block global average pool
    Classifier,  // dense
    Expand,
    Depthwise,
    SePool,
    SeSqueeze,
    SeExcite,
    SeScale,
    Project,
    Residual,
    Normalization,
    Activation,
};

std::string_view to_string(LayerRole role);

struct FeatureShape {
    int c = 0;
    int h = 0;
    int w = 0;

    std::size_t size() const { return static_cast<std::size_t>(c) * h * w; }
    bool operator==(const FeatureShape&) const = default;
};

struct LayerGeometry {
    FeatureShape in;
    FeatureShape out;
};

/// Ordered list of blocks plus the metadata needed to shape it.
struct NetworkGraph {
    std::string arch_name;
    double alpha = 1.0;
    int input_resolution = 224;
    int input_channels = 3;
    /// MobileNet convention: the last feature convolution never shrinks below
    /// its base width under a width multiplier.
    bool tail_min_width = false;
    std::vector<Block> blocks;

    std::size_t layer_count() const;
    bool is_weighted() const;

    bool operator==(const NetworkGraph&) const = default;
};

/// Output size of a same-padded convolution.
inline int conv_output_size(int size, int stride) { return (size + stride - 1) / stride; }

/// Checks every structural invariant; throws ShapeError or ManifestError.
void validate(const NetworkGraph& graph);

/// Per block, per layer input/output feature shapes at the given resolution.
std::vector<std::vector<LayerGeometry>> propagate_shapes(const NetworkGraph& graph, int resolution);

std::vector<std::vector<LayerRole>> infer_roles(const NetworkGraph& graph);

} // namespace qnet::ir
