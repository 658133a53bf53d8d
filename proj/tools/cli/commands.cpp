// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnet/error.hpp"
#include "qnet/frontend/bn_fusion.hpp"
#include "qnet/frontend/calibration.hpp"
#include "qnet/frontend/qnet_io.hpp"
#include "qnet/ir/blob.hpp"
#include "qnet/ir/counting.hpp"
#include "qnet/ir/manifest.hpp"
#include "qnet/random.hpp"
#include "qnet/runtime/oracle.hpp"
#include "qnet/runtime/runtime.hpp"
#include "qnet/soc/compiler.hpp"
#include "qnet/soc/plan_io.hpp"
#include "qnet/soc/structure.hpp"

namespace qnet::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

/// Paths a command is about to produce. Unless committed, they are deleted
/// when the command unwinds.
class Artifacts {
public:
    explicit Artifacts(const fs::path& dir) : dir_(dir) { fs::create_directories(dir_); }
    ~Artifacts() {
        if (committed_)
            return;
        std::error_code ec;
        for (const auto& p : paths_)
            fs::remove_all(p, ec);
    }
    Artifacts(const Artifacts&) = delete;
    Artifacts& operator=(const Artifacts&) = delete;

    fs::path file(const std::string& name) {
        paths_.push_back(dir_ / name);
        return paths_.back();
    }
    /// A manifest plus its blob directory.
    fs::path manifest(const std::string& name) {
        const auto p = file(name);
        paths_.push_back(dir_ / ir::blob_dir_for(p));
        return p;
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << text;
    if (!out)
        throw Error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ir::FloatTensor random_input(Rng& rng, int channels, int resolution) {
    ir::FloatTensor t({channels, resolution, resolution});
    for (auto& v : t.storage())
        v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return t;
}

ir::FloatTensor read_input_blob(const fs::path& path, int channels, int resolution) {
    ir::FloatTensor t({channels, resolution, resolution});
    t.storage() = ir::read_f32_blob(path, t.size());
    return t;
}

soc::DeviceProfile device_of(const PipelineConfig& cfg) {
    return cfg.device.empty() ? soc::xczu9eg() : soc::load_device_profile(cfg.device);
}

/// FNV-1a over the int32 codes, for compact output fingerprints.
std::uint64_t digest(std::span<const std::int32_t> codes) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : codes)
        for (int b = 0; b < 4; ++b) {
            h ^= (static_cast<std::uint32_t>(v) >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

ir::NetworkGraph load_graph(const fs::path& manifest, const PipelineConfig& cfg) {
    ir::NetworkGraph g = ir::load_model(manifest);
    if (cfg.alpha && *cfg.alpha != g.alpha) {
        if (g.alpha != 1.0)
            throw ManifestError("alpha override needs a base (alpha 1) manifest; " + manifest.string() +
                                " has alpha " + std::to_string(g.alpha));
        g = ir::apply_width_multiplier(g, *cfg.alpha);
    }
    if (cfg.resolution)
        g.input_resolution = *cfg.resolution;
    return g;
}

int cmd_fuse(const GlobalOptions& g, const PipelineConfig& cfg, const fs::path& model, std::ostream& log) {
    Artifacts art(g.out_dir);
    const auto graph = load_graph(model, cfg);
    const auto fused = frontend::fuse_batch_norms(graph);
    const auto out = art.manifest(kFusedFile);
    ir::save_model(fused, out);
    art.commit();
    log << "fused " << graph.layer_count() << " layers into " << fused.layer_count() << ": " << out.string() << "\n";
    return kExitOk;
}

int cmd_calibrate(const GlobalOptions& g, const PipelineConfig& cfg, const fs::path& model, const fs::path& dataset,
                  std::ostream& log) {
    Artifacts art(g.out_dir);
    const auto graph = load_graph(model, cfg);
    std::vector<ir::FloatTensor> samples;
    if (!dataset.empty()) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dataset))
            if (e.is_regular_file())
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            samples.push_back(read_input_blob(f, graph.input_channels, graph.input_resolution));
        if (samples.empty())
            throw QuantError("calibration dataset " + dataset.string() + " is empty");
    } else {
        Rng rng(g.seed);
        for (int i = 0; i < cfg.calibration_samples; ++i)
            samples.push_back(random_input(rng, graph.input_channels, graph.input_resolution));
    }
    const auto stats = frontend::calibrate(graph, samples);
    const auto out = art.file(kStatsFile);
    frontend::save_stats(stats, out);
    art.commit();
    log << "calibrated " << stats.ranges.size() << " tensors over " << stats.samples << " samples: " << out.string()
        << "\n";
    return kExitOk;
}

int cmd_quantize(const GlobalOptions& g, const PipelineConfig& cfg, const fs::path& model, const fs::path& stats,
                 std::ostream& log) {
    Artifacts art(g.out_dir);
    const auto graph = load_graph(model, cfg);
    const auto q = frontend::fuse_activation(graph, frontend::load_stats(stats), cfg.quant_config());
    const auto out = art.manifest(kQNetFile);
    frontend::save_qnet(q, out);
    art.commit();
    log << "quantized " << q.layer_count() << " operators at BW " << q.bw << ": " << out.string() << "\n";
    return kExitOk;
}

int cmd_compile(const GlobalOptions& g, const PipelineConfig& cfg, const fs::path& qnet, const fs::path& model,
                std::ostream& log) {
    if (qnet.empty() == model.empty())
        throw Error("compile needs exactly one of --qnet and --model");
    Artifacts art(g.out_dir);
    soc::PlanInput in;
    if (!qnet.empty()) {
        in = soc::plan_input(frontend::load_qnet(qnet));
    } else {
        const auto graph = load_graph(model, cfg);
        in = soc::plan_input(graph, cfg.bw, cfg.first_conv_bw, cfg.input_bw);
    }
    const auto plan = soc::compile_plan(in, device_of(cfg), cfg.compile_options());
    const auto schedule = soc::emit_schedule(plan);
    soc::check_layout(schedule);
    const auto out = art.file(kPlanFile);
    soc::save_plan(plan, schedule, out);
    std::ostringstream report;
    soc::write_plan_report(report, plan, schedule);
    write_file(art.file(kPlanReportFile), report.str());
    art.commit();
    log << "compiled " << plan.arch_name << ": " << plan.invocations.size() << " invocations";
    for (const auto& cu : plan.cus)
        log << ", " << soc::to_string(cu.kind) << " x" << plan.invocation_count(cu.kind);
    log << "; DSP " << plan.resources.dsp << " (" << fixed(100 * plan.resources.dsp_fraction, 1) << "%), "
        << (plan.resources.feasible ? "feasible" : "infeasible") << ": " << out.string() << "\n";
    return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const PipelineConfig& cfg, const SimulateArgs& args, std::ostream& log) {
    if (args.inputs < 1)
        throw Error("--inputs must be positive");
    Artifacts art(g.out_dir);
    const auto q = frontend::load_qnet(args.qnet);

    // Rebuild the plan from the model with the recorded settings; any
    // difference means the plan was compiled from something else.
    const auto settings = soc::load_plan_settings(args.plan);
    if (settings.resolution != q.input_resolution)
        throw PlanError("plan resolution " + std::to_string(settings.resolution) + " does not match model resolution " +
                        std::to_string(q.input_resolution));
    auto plan = soc::compile_plan(soc::plan_input(q), settings.device, settings.options);
    auto schedule = soc::emit_schedule(plan);
    if (soc::plan_to_json(plan, schedule) != read_file(args.plan))
        throw PlanError("plan " + args.plan.string() + " was not compiled from " + args.qnet.string());

    runtime::Runtime rt(q, plan, schedule);
    runtime::InferenceOptions opts;
    opts.driver = cfg.driver;
    opts.fifo_depth = cfg.fifo_depth;
    opts.frequency_hz = cfg.frequency_mhz * 1e6;

    std::vector<ir::FloatTensor> images;
    if (!args.input.empty()) {
        images.push_back(read_input_blob(args.input, q.input_channels, q.input_resolution));
    } else {
        Rng rng(g.seed);
        for (int i = 0; i < args.inputs; ++i)
            images.push_back(random_input(rng, q.input_channels, q.input_resolution));
    }

    const auto analytic = runtime::trace_transactions(rt.plan(), rt.schedule());
    bool all_match = true;
    ojson results = ojson::array();
    runtime::InferenceResult first;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto x = runtime::quantize_input(q, images[i]);
        auto r = rt.infer(x, opts);
        if (!(r.trace == analytic))
            throw MemoryError("measured transaction trace differs from the analytic trace");
        ojson item;
        item["index"] = i;
        item["output_shape"] = r.output.dims();
        item["output_digest"] = hex(digest(r.output.data()));
        if (r.argmax >= 0) {
            item["argmax"] = r.argmax;
            std::vector<int> order(r.logits.size());
            for (std::size_t k = 0; k < order.size(); ++k)
                order[k] = static_cast<int>(k);
            const auto top = std::min<std::size_t>(5, order.size());
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                              [&](int a, int b) { return r.logits[static_cast<std::size_t>(a)] >
                                                         r.logits[static_cast<std::size_t>(b)]; });
            ojson top5 = ojson::array();
            for (std::size_t k = 0; k < top; ++k) {
                const auto c = static_cast<std::size_t>(order[k]);
                top5.push_back({{"class", order[k]}, {"logit", r.logits[c]}, {"confidence", r.confidences[c]}});
            }
            item["top5"] = std::move(top5);
        }
        if (args.oracle_check) {
            const bool match = runtime::run_oracle(q, x) == r.output;
            all_match &= match;
            item["oracle"] = match ? "match" : "mismatch";
        }
        results.push_back(std::move(item));
        if (i == 0)
            first = std::move(r);
    }

    ojson doc;
    doc["arch"] = q.arch_name;
    doc["resolution"] = q.input_resolution;
    doc["driver"] = std::string(kernel::to_string(cfg.driver));
    doc["seed"] = g.seed;
    doc["inputs"] = std::move(results);
    doc["stream_bytes"] = first.trace.total(runtime::TransferKind::Stream);
    doc["burst_bytes"] = first.trace.total(runtime::TransferKind::Burst);
    doc["total_cycles"] = first.perf.total_cycles;
    doc["fps"] = first.perf.fps;
    write_file(art.file(kInferenceFile), doc.dump(2) + "\n");
    if (args.trace) {
        std::ostringstream csv;
        runtime::write_trace_csv(csv, first.trace, rt.plan());
        write_file(art.file(kTraceFile), csv.str());
    }
    if (args.perf) {
        std::ostringstream table;
        runtime::write_perf_table(table, first.perf);
        write_file(art.file(kPerfFile), table.str());
    }
    art.commit();

    log << "simulated " << images.size() << " input(s) on " << q.arch_name << " over " << plan.invocations.size()
        << " invocations";
    if (first.argmax >= 0)
        log << "; first argmax " << first.argmax;
    log << "; " << fixed(first.perf.fps, 2) << " FPS (model)";
    if (args.oracle_check)
        log << "; oracle " << (all_match ? "bit-exact" : "MISMATCH");
    log << "\n";
    return all_match ? kExitOk : kExitOracleMismatch;
}

int cmd_report(const GlobalOptions& g, const PipelineConfig& cfg, const std::vector<fs::path>& models,
               std::ostream& log) {
    if (models.empty())
        throw Error("report needs at least one --model");
    Artifacts art(g.out_dir);
    struct Row {
        std::string arch;
        double alpha;
        int resolution;
        std::uint64_t params_bits;
        std::uint64_t ops;
        double complexity;
    };
    std::vector<Row> rows;
    std::ostringstream txt;
    txt << "model complexity (weights BW " << cfg.bw << ", first conv BW " << cfg.first_conv_bw << ")\n";
    txt << std::left << std::setw(24) << "network" << std::right << std::setw(7) << "alpha" << std::setw(12)
        << "Params(Mb)";
    for (int h : cfg.report_resolutions)
        txt << std::setw(13) << ("Ops(M)@" + std::to_string(h));
    txt << "\n";
    ojson networks = ojson::array();
    for (const auto& m : models) {
        const auto graph = load_graph(m, cfg);
        const auto bw = ir::BitWidthMap::standard(graph, cfg.bw, cfg.first_conv_bw);
        const auto bits = ir::count_params_bits(graph, bw);
        txt << std::left << std::setw(24) << graph.arch_name << std::right << std::setw(7) << fixed(graph.alpha, 2)
            << std::setw(12) << fixed(static_cast<double>(bits) / ir::kBitsPerMb, 3);
        ojson ops = ojson::object();
        for (int h : cfg.report_resolutions) {
            const auto n = ir::count_ops(graph, h);
            txt << std::setw(13) << fixed(static_cast<double>(n) / 1e6, 1);
            ops[std::to_string(h)] = n;
            rows.push_back({graph.arch_name, graph.alpha, h, bits, n, ir::network_complexity(bits, n)});
        }
        txt << "\n";
        networks.push_back({{"manifest", m.filename().string()},
                            {"arch", graph.arch_name},
                            {"alpha", graph.alpha},
                            {"params_bits", bits},
                            {"ops", std::move(ops)}});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.complexity < b.complexity; });
    txt << "\nconfigurations by complexity (params bits x ops)\n";
    txt << std::left << std::setw(24) << "network" << std::right << std::setw(7) << "alpha" << std::setw(6) << "H"
        << std::setw(12) << "Params(Mb)" << std::setw(10) << "Ops(M)" << std::setw(14) << "complexity" << "\n";
    for (const auto& r : rows) {
        char cx[32];
        std::snprintf(cx, sizeof cx, "%.4e", r.complexity);
        txt << std::left << std::setw(24) << r.arch << std::right << std::setw(7) << fixed(r.alpha, 2) << std::setw(6)
            << r.resolution << std::setw(12) << fixed(static_cast<double>(r.params_bits) / ir::kBitsPerMb, 3)
            << std::setw(10) << fixed(static_cast<double>(r.ops) / 1e6, 1) << std::setw(14) << cx << "\n";
    }
    ojson doc;
    doc["bw"] = cfg.bw;
    doc["first_conv_bw"] = cfg.first_conv_bw;
    doc["resolutions"] = cfg.report_resolutions;
    doc["networks"] = std::move(networks);
    write_file(art.file(kReportFile), txt.str());
    write_file(art.file(kReportJsonFile), doc.dump(2) + "\n");
    art.commit();
    log << txt.str();
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qnet: quantized network to fused streaming accelerator flow", "qnet"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    GlobalOptions g;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out-dir", out_dir, "Directory for artifacts")->capture_default_str();
    app.add_option("--seed", g.seed, "Seed for random calibration and test inputs")->capture_default_str();

    std::string model, dataset, stats, qnet, device, plan;
    std::vector<std::string> models, lanes;
    SimulateArgs sim;

    auto* fuse = app.add_subcommand("fuse", "Fold batch norms into the preceding convolutions");
    fuse->add_option("--model", model, "Float manifest")->required()->check(CLI::ExistingFile);

    auto* calibrate = app.add_subcommand("calibrate", "Record activation ranges");
    calibrate->add_option("--model", model, "Fused float manifest")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--dataset", dataset, "Directory of f32 input blobs (default: random inputs)")
        ->check(CLI::ExistingDirectory);

    auto* quantize = app.add_subcommand("quantize", "Lower to the integer QNet");
    quantize->add_option("--model", model, "Fused float manifest")->required()->check(CLI::ExistingFile);
    quantize->add_option("--stats", stats, "Calibration statistics")->required()->check(CLI::ExistingFile);

    auto* compile = app.add_subcommand("compile", "Map to compute units and emit the plan and schedule");
    compile->add_option("--qnet", qnet, "QNet manifest")->check(CLI::ExistingFile);
    compile->add_option("--model", model, "Shape-only or float manifest")->check(CLI::ExistingFile);
    compile->add_option("--device", device, "Device profile (overrides the config)")->check(CLI::ExistingFile);
    compile->add_option("--lanes", lanes, "Lane override TYPE=N, e.g. depthwise=16 (repeatable)");

    auto* simulate = app.add_subcommand("simulate", "Run the schedule on the streaming simulator");
    simulate->add_option("--qnet", sim.qnet, "QNet manifest")->required()->check(CLI::ExistingFile);
    simulate->add_option("--plan", sim.plan, "Plan document from compile")->required()->check(CLI::ExistingFile);
    simulate->add_option("--input", sim.input, "f32 input blob (default: random inputs)")->check(CLI::ExistingFile);
    simulate->add_option("--inputs", sim.inputs, "Number of random inputs")->capture_default_str();
    simulate->add_flag("--trace", sim.trace, "Write the transaction table");
    simulate->add_flag("--perf", sim.perf, "Write the performance table");
    simulate->add_flag("--oracle-check", sim.oracle_check, "Compare against the layer-by-layer oracle");

    auto* report = app.add_subcommand("report", "Complexity tables for one or more manifests");
    report->add_option("--model", models, "Float or shape-only manifests")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code != 0 && e.get_exit_code() != static_cast<int>(CLI::ExitCodes::Success)) {
            err << app.help();
            return kExitUsage;
        }
        return kExitOk;
    }

    try {
        g.out_dir = out_dir;
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (!device.empty())
            cfg.device = device;
        for (const auto& l : lanes) {
            const auto eq = l.find('=');
            if (eq == std::string::npos)
                throw Error("--lanes expects TYPE=N, got '" + l + "'");
            cfg.lanes[soc::op_type_from_string(l.substr(0, eq))] = std::stoi(l.substr(eq + 1));
        }
        validate(cfg);

        if (*fuse)
            return cmd_fuse(g, cfg, model, out);
        if (*calibrate)
            return cmd_calibrate(g, cfg, model, dataset, out);
        if (*quantize)
            return cmd_quantize(g, cfg, model, stats, out);
        if (*compile)
            return cmd_compile(g, cfg, qnet, model, out);
        if (*simulate)
            return cmd_simulate(g, cfg, sim, out);
        if (*report)
            return cmd_report(g, cfg, std::vector<fs::path>(models.begin(), models.end()), out);
        err << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "qnet: error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace qnet::cli
