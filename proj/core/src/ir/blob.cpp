// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/ir/blob.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "qnet/error.hpp"

namespace qnet::ir {

namespace {

void put_le(std::vector<char>& out, std::uint32_t v, std::size_t bytes) {
    for (std::size_t i = 0; i < bytes; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_le(const char* p, std::size_t bytes) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

void write_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ManifestError("cannot write blob " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<char> read_bytes(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw ManifestError("missing weight blob " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() != expected)
        throw ManifestError("shape mismatch: blob " + path.filename().string() + " has " +
                            std::to_string(bytes.size()) + " bytes, manifest implies " +
                            std::to_string(expected));
    return bytes;
}

} // namespace

std::string_view to_string(BlobType t) {
    switch (t) {
    case BlobType::F32: return "f32";
    case BlobType::I32: return "i32";
    case BlobType::U8: return "u8";
    case BlobType::I8: return "i8";
    }
    return "?";
}

BlobType blob_type_from_string(std::string_view s) {
    if (s == "f32") return BlobType::F32;
    if (s == "i32") return BlobType::I32;
    if (s == "u8") return BlobType::U8;
    if (s == "i8") return BlobType::I8;
    throw ManifestError("unknown blob dtype '" + std::string(s) + "'");
}

std::size_t blob_type_size(BlobType t) {
    return (t == BlobType::F32 || t == BlobType::I32) ? 4 : 1;
}

void write_blob(const std::filesystem::path& path, std::span<const float> values) {
    std::vector<char> bytes;
    bytes.reserve(values.size() * 4);
    for (float v : values)
        put_le(bytes, std::bit_cast<std::uint32_t>(v), 4);
    write_bytes(path, bytes);
}

void write_blob(const std::filesystem::path& path, std::span<const std::int32_t> values, BlobType type) {
    const std::size_t width = blob_type_size(type);
    std::vector<char> bytes;
    bytes.reserve(values.size() * width);
    for (std::int32_t v : values) {
        if (type == BlobType::U8 && (v < 0 || v > 255))
            throw ManifestError("value out of u8 range in blob " + path.string());
        if (type == BlobType::I8 && (v < -128 || v > 127))
            throw ManifestError("value out of i8 range in blob " + path.string());
        put_le(bytes, static_cast<std::uint32_t>(v), width);
    }
    write_bytes(path, bytes);
}

std::vector<float> read_f32_blob(const std::filesystem::path& path, std::size_t count) {
    const auto bytes = read_bytes(path, count * 4);
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::bit_cast<float>(get_le(bytes.data() + 4 * i, 4));
    return out;
}

std::vector<std::int32_t> read_int_blob(const std::filesystem::path& path, std::size_t count, BlobType type) {
    const std::size_t width = blob_type_size(type);
    const auto bytes = read_bytes(path, count * width);
    std::vector<std::int32_t> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t raw = get_le(bytes.data() + width * i, width);
        switch (type) {
        case BlobType::I32: out[i] = static_cast<std::int32_t>(raw); break;
        case BlobType::U8: out[i] = static_cast<std::int32_t>(raw); break;
        case BlobType::I8: out[i] = static_cast<std::int8_t>(static_cast<std::uint8_t>(raw)); break;
        case BlobType::F32: throw ManifestError("f32 blob read as integer");
        }
    }
    return out;
}

} // namespace qnet::ir
