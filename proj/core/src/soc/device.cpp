// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/device.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "qnet/error.hpp"

namespace qnet::soc {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::int64_t parse_count(std::string_view v, const std::string& where) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ManifestError(where + ": expected an integer, got '" + std::string(v) + "'");
    if (out <= 0)
        throw ManifestError(where + ": capacity must be positive");
    return out;
}

} // namespace

DeviceProfile parse_device_profile(std::string_view text, const std::string& origin) {
    DeviceProfile p;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ManifestError(where + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ManifestError(where + ": duplicate key '" + key + "'");
        if (key == "name") {
            if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                value = value.substr(1, value.size() - 2);
            p.name = std::string(value);
        } else if (key == "dsp_count") {
            p.dsp_count = parse_count(value, where);
        } else if (key == "bram_bits") {
            p.bram_bits = parse_count(value, where);
        } else if (key == "lut_budget") {
            p.lut_budget = parse_count(value, where);
        } else {
            throw ManifestError(where + ": unknown key '" + key + "'");
        }
    }
    for (const char* key : {"name", "dsp_count", "bram_bits", "lut_budget"})
        if (!seen.count(key))
            throw ManifestError(origin + ": missing key '" + key + "'");
    if (p.name.empty())
        throw ManifestError(origin + ": empty device name");
    return p;
}

DeviceProfile load_device_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ManifestError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_device_profile(ss.str(), path.string());
}

DeviceProfile xczu9eg() { return {"xczu9eg", 2520, 912LL * 36864, 274080}; }

} // namespace qnet::soc
