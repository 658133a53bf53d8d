// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnet/frontend/qnet.hpp"
#include "qnet/kernel/stream.hpp"
#include "qnet/soc/plan.hpp"

namespace qnet::cli {

/// Every knob of the pipeline. Loaded from a JSON file given by --config;
/// absent keys keep their defaults, unknown keys are rejected.
struct PipelineConfig {
    // Quantization.
    int bw = 4;
    int first_conv_bw = 8;
    int input_bw = 8;
    frontend::QuantMode weight_mode = frontend::QuantMode::Asymmetric;
    frontend::Granularity granularity = frontend::Granularity::PerChannel;
    frontend::RequantMode rounding = frontend::RequantMode::FixedPoint;
    /// Random calibration inputs drawn when no dataset directory is given.
    int calibration_samples = 4;

    // Network shape overrides for shape-only manifests.
    std::optional<double> alpha;
    std::optional<int> resolution;

    // Hardware plan.
    /// Device profile file; empty selects the built-in XCZU9EG profile.
    std::string device;
    std::int64_t residual_budget_bits = 512 * 1024;
    std::map<soc::OpType, int> lanes;

    // Simulation.
    kernel::Driver driver = kernel::Driver::RoundRobin;
    std::size_t fifo_depth = 0;
    double frequency_mhz = 200.0;

    // Report grid.
    std::vector<int> report_resolutions{224, 192, 160, 128, 96};

    frontend::QuantConfig quant_config() const;
    soc::CompileOptions compile_options() const;

    bool operator==(const PipelineConfig&) const = default;
};

/// Throws ManifestError when a value is out of its documented range.
void validate(const PipelineConfig& cfg);

/// Canonical JSON text (every key, fixed order); parse(to_json(c)) == c.
std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);

} // namespace qnet::cli
