// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "qnet/soc/plan.hpp"
#include "qnet/soc/schedule.hpp"

namespace qnet::soc {

inline constexpr int kPlanFormatVersion = 1;

/// Machine-readable plan document: compile settings, CU table (slots,
/// knobs, buffers), resource report, invocation list and memory layout.
std::string plan_to_json(const HardwarePlan& plan, const Schedule& schedule);
void save_plan(const HardwarePlan& plan, const Schedule& schedule, const std::filesystem::path& path);

/// Settings needed to regenerate a plan from the same network.
struct PlanSettings {
    DeviceProfile device;
    CompileOptions options;
    int resolution = 0;
};

/// Reads the device and compile options recorded in a plan document.
/// Throws ManifestError on malformed documents.
PlanSettings load_plan_settings(const std::filesystem::path& path);

/// Human-readable report: CU table, knob table, buffer table, resources,
/// schedule listing and memory map.
void write_plan_report(std::ostream& out, const HardwarePlan& plan, const Schedule& schedule);

} // namespace qnet::soc
