// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

// Shared JSON helpers for the float manifest and its quantized extension.

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qnet/ir/blob.hpp"
#include "qnet/ir/graph.hpp"

namespace qnet::ir::detail {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

ojson header_json(const NetworkGraph& g);
void parse_header(const json& j, NetworkGraph& g);

ojson layer_structure_json(const Layer& l, std::size_t block);
Layer parse_layer_structure(const json& j);
std::size_t parse_block_index(const json& j);

/// Groups (block index, layer) pairs into blocks; block kind is inferred
/// (a block holding a depthwise and a pointwise conv is an inverted
/// residual block), residual flag from a residual-add layer.
std::vector<Block> assemble_blocks(std::vector<std::pair<std::size_t, Layer>> layers);

std::string blob_file_name(const std::string& layer, const std::string& tensor);
ojson tensor_ref(const std::string& rel_path, const std::vector<int>& shape, BlobType type);

struct TensorRef {
    std::filesystem::path path;
    std::vector<int> shape;
    BlobType type;
    std::size_t count() const;
};
TensorRef parse_tensor_ref(const json& j, const std::filesystem::path& base);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace qnet::ir::detail
