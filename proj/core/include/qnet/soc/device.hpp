// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qnet::soc {

/// Capacities of the target programmable logic.
struct DeviceProfile {
    std::string name;
    std::int64_t dsp_count = 0;
    std::int64_t bram_bits = 0;
    /// Carried for reporting; LUT usage is not modeled.
    std::int64_t lut_budget = 0;

    bool operator==(const DeviceProfile&) const = default;
};

/// Parses "key = value" lines ('#' starts a comment, string values may be
/// quoted). Required keys: name, dsp_count, bram_bits, lut_budget. Throws
/// ManifestError on unknown keys, missing keys or non-positive capacities.
DeviceProfile parse_device_profile(std::string_view text, const std::string& origin = "<profile>");
DeviceProfile load_device_profile(const std::filesystem::path& path);

/// Zynq UltraScale+ XCZU9EG: 2520 DSP slices, 912 BRAM36 blocks, 274080
/// LUTs. Same values as models/devices/xczu9eg.toml.
DeviceProfile xczu9eg();

} // namespace qnet::soc
