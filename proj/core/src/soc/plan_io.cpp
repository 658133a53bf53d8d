// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/soc/plan_io.hpp"

#include <cstdio>
#include <iomanip>

#include "../ir/manifest_json.hpp"
#include "qnet/error.hpp"

namespace qnet::soc {

using ir::detail::json;
using ir::detail::ojson;

namespace {

ojson shape_json(const ir::FeatureShape& s) { return ojson::array({s.c, s.h, s.w}); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

std::string plan_to_json(const HardwarePlan& plan, const Schedule& schedule) {
    ojson j;
    j["format_version"] = kPlanFormatVersion;
    j["arch"] = plan.arch_name;
    j["alpha"] = plan.alpha;
    j["resolution"] = plan.resolution;
    j["input_bw"] = plan.input_bw;
    j["activation_bw"] = plan.activation_bw;
    j["has_classifier"] = plan.has_classifier;
    j["partition_rule"] = "Body = longest contiguous run of structurally isomorphic inverted-residual blocks";
    j["device"] = {{"name", plan.device.name},
                   {"dsp_count", plan.device.dsp_count},
                   {"bram_bits", plan.device.bram_bits},
                   {"lut_budget", plan.device.lut_budget}};
    ojson lanes = ojson::object();
    for (const auto& [type, n] : plan.options.lanes)
        lanes[std::string(to_string(type))] = n;
    j["options"] = {{"residual_budget_bits", plan.options.residual_budget_bits}, {"lanes", lanes}};

    ojson cus = ojson::array();
    for (const auto& cu : plan.cus) {
        ojson c;
        c["kind"] = std::string(to_string(cu.kind));
        c["invocations"] = plan.invocation_count(cu.kind);
        c["fused_operators"] = cu.fused_operator_count();
        c["residual"] = std::string(to_string(cu.residual));
        c["squeeze_excite"] = cu.squeeze_excite;
        ojson slots = ojson::array();
        for (const auto& s : cu.slots)
            slots.push_back({{"type", std::string(to_string(s.type))},
                             {"always_present", s.always_present},
                             {"k_max", s.k_max},
                             {"n_max", s.n_max},
                             {"m_max", s.m_max},
                             {"lanes", s.lanes},
                             {"parallel_ops", s.parallel_ops}});
        c["slots"] = std::move(slots);
        ojson bufs = ojson::array();
        for (const auto& b : cu.buffers)
            bufs.push_back({{"name", b.name}, {"kind", std::string(to_string(b.kind))}, {"slot", b.slot}, {"bits", b.bits}});
        c["buffers"] = std::move(bufs);
        c["multipliers"] = cu.multipliers();
        c["buffer_bits"] = cu.buffer_bits();
        cus.push_back(std::move(c));
    }
    j["compute_units"] = std::move(cus);

    const auto& r = plan.resources;
    j["resources"] = {{"device", r.device},
                      {"multipliers", r.multipliers},
                      {"dsp", r.dsp},
                      {"dsp_fraction", r.dsp_fraction},
                      {"buffer_bits", r.buffer_bits},
                      {"bram_fraction", r.bram_fraction},
                      {"luts", "unmodeled"},
                      {"feasible", r.feasible},
                      {"violations", r.violations}};

    ojson invs = ojson::array();
    for (const auto& si : schedule.invocations) {
        const auto& inv = si.call;
        ojson layers = ojson::array();
        for (const auto& l : inv.layers)
            layers.push_back({{"name", l.name},
                              {"block", l.block},
                              {"slot", l.slot},
                              {"n", l.n},
                              {"m", l.m},
                              {"k", l.k},
                              {"stride", l.stride},
                              {"groups", l.groups},
                              {"in", shape_json(l.in)},
                              {"out", shape_json(l.out)},
                              {"weight_bw", l.weight_bw},
                              {"in_bw", l.in_bw},
                              {"out_bw", l.out_bw}});
        invs.push_back({{"index", inv.index},
                        {"cu", std::string(to_string(inv.cu))},
                        {"repeat", inv.repeat},
                        {"blocks", inv.blocks},
                        {"residual", inv.residual},
                        {"squeeze_excite", inv.squeeze_excite},
                        {"in", shape_json(inv.in)},
                        {"out", shape_json(inv.out)},
                        {"input_region", si.input_region},
                        {"output_region", si.output_region},
                        {"weights_region", si.weights_region},
                        {"qparams_region", si.qparams_region},
                        {"spill_region", si.spill_region},
                        {"layers", std::move(layers)}});
    }
    ojson regions = ojson::array();
    for (const auto& reg : schedule.regions)
        regions.push_back({{"name", reg.name},
                           {"kind", std::string(to_string(reg.kind))},
                           {"offset", reg.offset},
                           {"bytes", reg.bytes},
                           {"first", reg.first},
                           {"last", reg.last}});
    j["schedule"] = {{"invocations", std::move(invs)},
                     {"input_region", schedule.input_region},
                     {"output_region", schedule.output_region},
                     {"parameter_bytes", schedule.parameter_bytes},
                     {"total_bytes", schedule.total_bytes},
                     {"regions", std::move(regions)}};
    return j.dump(2) + "\n";
}

void save_plan(const HardwarePlan& plan, const Schedule& schedule, const std::filesystem::path& path) {
    ir::detail::write_text_file(path, plan_to_json(plan, schedule));
}

PlanSettings load_plan_settings(const std::filesystem::path& path) {
    const json j = ir::detail::read_json_file(path);
    PlanSettings s;
    try {
        if (j.at("format_version").get<int>() != kPlanFormatVersion)
            throw ManifestError("unsupported plan format_version in " + path.string());
        const auto& d = j.at("device");
        s.device = {d.at("name").get<std::string>(), d.at("dsp_count").get<std::int64_t>(),
                    d.at("bram_bits").get<std::int64_t>(), d.at("lut_budget").get<std::int64_t>()};
        const auto& o = j.at("options");
        s.options.residual_budget_bits = o.at("residual_budget_bits").get<std::int64_t>();
        for (const auto& [type, n] : o.at("lanes").items())
            s.options.lanes[op_type_from_string(type)] = n.get<int>();
        s.resolution = j.at("resolution").get<int>();
    } catch (const json::exception& e) {
        throw ManifestError("malformed plan " + path.string() + ": " + e.what());
    } catch (const PlanError& e) {
        throw ManifestError("malformed plan " + path.string() + ": " + e.what());
    }
    return s;
}

void write_plan_report(std::ostream& out, const HardwarePlan& plan, const Schedule& schedule) {
    out << "plan: " << plan.arch_name << " alpha=" << plan.alpha << " H=" << plan.resolution
        << " activation BW=" << plan.activation_bw << "\n";
    out << "partition rule: Body = longest contiguous run of structurally isomorphic inverted-residual blocks\n\n";

    out << "compute units\n";
    out << "  " << std::left << std::setw(11) << "cu" << std::right << std::setw(12) << "invocations"
        << std::setw(8) << "fused" << std::setw(10) << "residual" << std::setw(5) << "se" << std::setw(13)
        << "multipliers" << std::setw(14) << "buffer bits" << "\n";
    for (const auto& cu : plan.cus)
        out << "  " << std::left << std::setw(11) << to_string(cu.kind) << std::right << std::setw(12)
            << plan.invocation_count(cu.kind) << std::setw(8) << cu.fused_operator_count() << std::setw(10)
            << to_string(cu.residual) << std::setw(5) << (cu.squeeze_excite ? "yes" : "no") << std::setw(13)
            << cu.multipliers() << std::setw(14) << cu.buffer_bits() << "\n";

    out << "\nknobs\n";
    for (const auto& cu : plan.cus)
        for (std::size_t i = 0; i < cu.slots.size(); ++i) {
            const auto& s = cu.slots[i];
            out << "  " << std::left << std::setw(11) << to_string(cu.kind) << std::setw(3) << i << std::setw(14)
                << to_string(s.type) << std::right << " K_max=" << std::setw(2) << s.k_max << " N_max=" << std::setw(5)
                << s.n_max << " lanes=" << std::setw(5) << s.lanes << " parallel_ops=" << std::setw(6)
                << s.parallel_ops << (s.always_present ? "" : " (optional)") << "\n";
        }

    out << "\nbuffers\n";
    for (const auto& cu : plan.cus)
        for (const auto& b : cu.buffers)
            out << "  " << std::left << std::setw(11) << to_string(cu.kind) << std::setw(28) << b.name << std::setw(18)
                << to_string(b.kind) << std::right << std::setw(10) << b.bits << " bits\n";

    const auto& r = plan.resources;
    out << "\nresources on " << r.device << "\n";
    out << "  multipliers " << r.multipliers << ", DSP " << r.dsp << " (" << fmt("%.1f%%", 100 * r.dsp_fraction)
        << "), buffer bits " << r.buffer_bits << " (" << fmt("%.1f%%", 100 * r.bram_fraction)
        << " of BRAM), LUTs unmodeled\n";
    out << "  " << (r.feasible ? "feasible" : "infeasible");
    for (const auto& v : r.violations)
        out << "; over budget: " << v;
    out << "\n\nschedule\n";
    for (const auto& si : schedule.invocations) {
        const auto& inv = si.call;
        out << "  " << std::setw(3) << inv.index << " " << std::left << std::setw(11) << to_string(inv.cu)
            << std::right << " #" << std::setw(2) << inv.repeat << " blocks";
        for (auto b : inv.blocks)
            out << ' ' << b;
        out << "  " << inv.in.c << "x" << inv.in.h << "x" << inv.in.w << " -> " << inv.out.c << "x" << inv.out.h
            << "x" << inv.out.w << (inv.residual ? " residual" : "") << (inv.squeeze_excite ? " se" : "")
            << "  in@" << schedule.region(si.input_region).offset << " out@"
            << schedule.region(si.output_region).offset << "\n";
    }
    out << "\nmemory map (" << schedule.total_bytes << " bytes, parameters " << schedule.parameter_bytes << ")\n";
    for (const auto& reg : schedule.regions)
        out << "  " << std::setw(10) << reg.offset << std::setw(10) << reg.bytes << "  " << std::left
            << std::setw(15) << to_string(reg.kind) << std::setw(26) << reg.name << std::right << " live "
            << reg.first << ".." << reg.last << "\n";
}

} // namespace qnet::soc
