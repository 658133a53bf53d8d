// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "qnet/ir/graph.hpp"

namespace qnet::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitOracleMismatch = 3;

/// Artifact file names written into --out-dir.
inline constexpr const char* kFusedFile = "fused.json";
inline constexpr const char* kStatsFile = "calibration.json";
inline constexpr const char* kQNetFile = "qnet.json";
inline constexpr const char* kPlanFile = "plan.json";
inline constexpr const char* kPlanReportFile = "plan.txt";
inline constexpr const char* kInferenceFile = "inference.json";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kPerfFile = "perf.txt";
inline constexpr const char* kReportFile = "report.txt";
inline constexpr const char* kReportJsonFile = "report.json";

struct GlobalOptions {
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
};

struct SimulateArgs {
    std::filesystem::path qnet;
    std::filesystem::path plan;
    /// Float input blob (C * H * W f32 values); empty draws random inputs.
    std::filesystem::path input;
    int inputs = 1;
    bool trace = false;
    bool perf = false;
    bool oracle_check = false;
};

/// Loads a float manifest and applies the config's alpha and resolution
/// overrides.
ir::NetworkGraph load_graph(const std::filesystem::path& manifest, const PipelineConfig& cfg);

/// Each command writes its artifacts into `g.out_dir` and a short summary
/// to `log`; on an exception every artifact it created is removed.
int cmd_fuse(const GlobalOptions& g, const PipelineConfig& cfg, const std::filesystem::path& model, std::ostream& log);
int cmd_calibrate(const GlobalOptions& g, const PipelineConfig& cfg, const std::filesystem::path& model,
                  const std::filesystem::path& dataset, std::ostream& log);
int cmd_quantize(const GlobalOptions& g, const PipelineConfig& cfg, const std::filesystem::path& model,
                 const std::filesystem::path& stats, std::ostream& log);
/// Exactly one of `qnet` and `model` is non-empty.
int cmd_compile(const GlobalOptions& g, const PipelineConfig& cfg, const std::filesystem::path& qnet,
                const std::filesystem::path& model, std::ostream& log);
int cmd_simulate(const GlobalOptions& g, const PipelineConfig& cfg, const SimulateArgs& args, std::ostream& log);
int cmd_report(const GlobalOptions& g, const PipelineConfig& cfg, const std::vector<std::filesystem::path>& models,
               std::ostream& log);

/// Parses the command line and dispatches; returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qnet::cli
