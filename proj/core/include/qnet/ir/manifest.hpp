// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "qnet/ir/graph.hpp"

namespace qnet::ir {

inline constexpr int kManifestFormatVersion = 1;

/// Reads a JSON manifest and the little-endian blobs it references
/// (paths are relative to the manifest's directory). The returned graph has
/// passed validate().
NetworkGraph load_model(const std::filesystem::path& manifest_path);

/// Writes the manifest and, for weighted graphs, one blob per tensor into
/// `<stem>_blobs/` next to it. Output is canonical: save(load(m)) reproduces
/// m byte for byte.
void save_model(const NetworkGraph& graph, const std::filesystem::path& manifest_path);

/// Directory name used for blobs of a manifest.
std::filesystem::path blob_dir_for(const std::filesystem::path& manifest_path);

} // namespace qnet::ir
