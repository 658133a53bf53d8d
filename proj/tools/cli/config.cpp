// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "qnet/error.hpp"

namespace qnet::cli {

using ojson = nlohmann::ordered_json;

frontend::QuantConfig PipelineConfig::quant_config() const {
    frontend::QuantConfig q;
    q.bw = bw;
    q.first_conv_bw = first_conv_bw;
    q.input_bw = input_bw;
    q.weight_mode = weight_mode;
    q.weight_granularity = granularity;
    q.requant_mode = rounding;
    return q;
}

soc::CompileOptions PipelineConfig::compile_options() const {
    soc::CompileOptions o;
    o.residual_budget_bits = residual_budget_bits;
    o.lanes = lanes;
    return o;
}

void validate(const PipelineConfig& c) {
    const auto fail = [](const std::string& what) { throw ManifestError("config: " + what); };
    for (const auto& [name, v] : {std::pair{"bw", c.bw}, {"first_conv_bw", c.first_conv_bw}, {"input_bw", c.input_bw}})
        if (v < 2 || v > 8)
            fail(std::string(name) + " must be in [2, 8], got " + std::to_string(v));
    if (c.calibration_samples < 1)
        fail("calibration_samples must be positive");
    if (c.alpha && !(*c.alpha > 0.0 && *c.alpha <= 1.0))
        fail("alpha must be in (0, 1]");
    if (c.resolution && (*c.resolution < 8 || *c.resolution > 1024))
        fail("resolution must be in [8, 1024]");
    if (c.residual_budget_bits < 0)
        fail("residual_budget_bits must not be negative");
    for (const auto& [type, n] : c.lanes) {
        if (!soc::is_mac_type(type))
            fail("lanes override for non-multiplier operator " + std::string(soc::to_string(type)));
        if (n < 1)
            fail("lanes override must be positive");
    }
    if (!(c.frequency_mhz > 0.0))
        fail("frequency_mhz must be positive");
    if (c.report_resolutions.empty())
        fail("report_resolutions must not be empty");
    for (int h : c.report_resolutions)
        if (h < 8 || h > 1024)
            fail("report resolution " + std::to_string(h) + " outside [8, 1024]");
}

std::string config_to_json(const PipelineConfig& c) {
    ojson j;
    j["bw"] = c.bw;
    j["first_conv_bw"] = c.first_conv_bw;
    j["input_bw"] = c.input_bw;
    j["weight_mode"] = std::string(frontend::to_string(c.weight_mode));
    j["granularity"] = std::string(frontend::to_string(c.granularity));
    j["rounding"] = std::string(frontend::to_string(c.rounding));
    j["calibration_samples"] = c.calibration_samples;
    j["alpha"] = c.alpha ? ojson(*c.alpha) : ojson(nullptr);
    j["resolution"] = c.resolution ? ojson(*c.resolution) : ojson(nullptr);
    j["device"] = c.device;
    j["residual_budget_bits"] = c.residual_budget_bits;
    ojson lanes = ojson::object();
    for (const auto& [type, n] : c.lanes)
        lanes[std::string(soc::to_string(type))] = n;
    j["lanes"] = std::move(lanes);
    j["driver"] = std::string(kernel::to_string(c.driver));
    j["fifo_depth"] = c.fifo_depth;
    j["frequency_mhz"] = c.frequency_mhz;
    j["report_resolutions"] = c.report_resolutions;
    return j.dump(2) + "\n";
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known{"bw",
                                             "first_conv_bw",
                                             "input_bw",
                                             "weight_mode",
                                             "granularity",
                                             "rounding",
                                             "calibration_samples",
                                             "alpha",
                                             "resolution",
                                             "device",
                                             "residual_budget_bits",
                                             "lanes",
                                             "driver",
                                             "fifo_depth",
                                             "frequency_mhz",
                                             "report_resolutions"};
    PipelineConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object())
            throw ManifestError(origin + ": config must be a JSON object");
        for (const auto& [key, value] : j.items())
            if (!known.count(key))
                throw ManifestError(origin + ": unknown config key '" + key + "'");
        const auto get = [&](const char* key, auto& field) {
            if (j.contains(key))
                field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("bw", c.bw);
        get("first_conv_bw", c.first_conv_bw);
        get("input_bw", c.input_bw);
        if (j.contains("weight_mode"))
            c.weight_mode = frontend::quant_mode_from_string(j.at("weight_mode").get<std::string>());
        if (j.contains("granularity"))
            c.granularity = frontend::granularity_from_string(j.at("granularity").get<std::string>());
        if (j.contains("rounding"))
            c.rounding = frontend::requant_mode_from_string(j.at("rounding").get<std::string>());
        get("calibration_samples", c.calibration_samples);
        if (j.contains("alpha") && !j.at("alpha").is_null())
            c.alpha = j.at("alpha").get<double>();
        if (j.contains("resolution") && !j.at("resolution").is_null())
            c.resolution = j.at("resolution").get<int>();
        get("device", c.device);
        get("residual_budget_bits", c.residual_budget_bits);
        if (j.contains("lanes"))
            for (const auto& [type, n] : j.at("lanes").items())
                c.lanes[soc::op_type_from_string(type)] = n.get<int>();
        if (j.contains("driver"))
            c.driver = kernel::driver_from_string(j.at("driver").get<std::string>());
        get("fifo_depth", c.fifo_depth);
        get("frequency_mhz", c.frequency_mhz);
        get("report_resolutions", c.report_resolutions);
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError(origin + ": " + e.what());
    } catch (const ManifestError&) {
        throw;
    } catch (const Error& e) {
        throw ManifestError(origin + ": " + e.what());
    }
    validate(c);
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ManifestError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

} // namespace qnet::cli
