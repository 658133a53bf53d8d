// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qnet::ir {

/// Element encodings of raw little-endian weight blobs.
enum class BlobType { F32, I32, U8, I8 };

std::string_view to_string(BlobType t);
BlobType blob_type_from_string(std::string_view s);
std::size_t blob_type_size(BlobType t);

void write_blob(const std::filesystem::path& path, std::span<const float> values);
void write_blob(const std::filesystem::path& path, std::span<const std::int32_t> values, BlobType type);

/// Reads exactly `count` elements; throws ManifestError when the file size
/// does not match.
std::vector<float> read_f32_blob(const std::filesystem::path& path, std::size_t count);
std::vector<std::int32_t> read_int_blob(const std::filesystem::path& path, std::size_t count, BlobType type);

} // namespace qnet::ir
