// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/qnet_io.hpp"

#include <cmath>
#include <limits>

#include "../ir/manifest_json.hpp"
#include "qnet/ir/manifest.hpp"

namespace qnet::frontend {

using ir::detail::json;
using ir::detail::ojson;

namespace {

ojson bound_json(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

double parse_bound(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

ojson spec_json(const QuantSpec& s) {
    ojson j;
    j["scale"] = s.scale;
    j["zero_point"] = s.zero_point;
    j["bw"] = s.bw;
    j["mode"] = std::string(to_string(s.mode));
    j["granularity"] = std::string(to_string(s.granularity));
    j["clip_range"] = ojson::array({bound_json(s.clip_lo), bound_json(s.clip_hi)});
    return j;
}

QuantSpec parse_spec(const json& j) {
    QuantSpec s;
    s.scale = j.at("scale").get<std::vector<double>>();
    s.zero_point = j.at("zero_point").get<std::vector<std::int32_t>>();
    s.bw = j.at("bw").get<int>();
    s.mode = quant_mode_from_string(j.at("mode").get<std::string>());
    s.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    const auto& clip = j.at("clip_range");
    s.clip_lo = parse_bound(clip.at(0), -std::numeric_limits<double>::infinity());
    s.clip_hi = parse_bound(clip.at(1), std::numeric_limits<double>::infinity());
    if (s.scale.empty() || s.scale.size() != s.zero_point.size())
        throw ManifestError("quantization spec needs matching scale and zero_point arrays");
    for (double v : s.scale)
        if (!(v > 0.0))
            throw ManifestError("quantization scale must be positive");
    return s;
}

bool has_spec(const QuantSpec& s) { return !s.scale.empty(); }

ojson requant_json(const std::vector<Requant>& rq) {
    std::vector<std::int32_t> mant;
    std::vector<int> shift;
    std::vector<double> real;
    for (const auto& r : rq) {
        mant.push_back(r.fixed.mantissa);
        shift.push_back(r.fixed.shift);
        real.push_back(r.real);
    }
    ojson j;
    j["mantissa"] = mant;
    j["shift"] = shift;
    j["real"] = real;
    return j;
}

std::vector<Requant> parse_requant(const json& j) {
    const auto mant = j.at("mantissa").get<std::vector<std::int32_t>>();
    const auto shift = j.at("shift").get<std::vector<int>>();
    const auto real = j.at("real").get<std::vector<double>>();
    if (mant.size() != shift.size() || mant.size() != real.size())
        throw ManifestError("requantization table arrays differ in length");
    std::vector<Requant> out;
    for (std::size_t i = 0; i < mant.size(); ++i)
        out.push_back({FixedMultiplier{mant[i], shift[i]}, real[i]});
    return out;
}

} // namespace

void save_qnet(const QNetModel& model, const std::filesystem::path& manifest_path) {
    const auto base = manifest_path.parent_path();
    const auto blob_dir = ir::blob_dir_for(manifest_path);
    const ir::NetworkGraph structure = structure_of(model);

    ojson j = ir::detail::header_json(structure);
    ojson qj;
    qj["format_version"] = kQNetFormatVersion;
    qj["bw"] = model.bw;
    qj["requant_mode"] = std::string(to_string(model.requant_mode));
    qj["input_spec"] = spec_json(model.input_spec);
    j["quantization"] = std::move(qj);

    ojson layers = ojson::array();
    for (std::size_t b = 0; b < model.blocks.size(); ++b) {
        for (std::size_t i = 0; i < model.blocks[b].layers.size(); ++i) {
            const QLayer& q = model.blocks[b].layers[i];
            ojson jl = ir::detail::layer_structure_json(structure.blocks[b].layers[i], b);
            ojson quant;
            quant["activation"] = std::string(to_string(q.act));
            quant["in_spec"] = spec_json(q.in_spec);
            if (has_spec(q.aux_spec))
                quant["aux_spec"] = spec_json(q.aux_spec);
            if (has_spec(q.out_spec))
                quant["out_spec"] = spec_json(q.out_spec);
            if (q.is_weighted())
                quant["weight_spec"] = spec_json(q.weight_spec);
            if (!q.requant.empty())
                quant["requant"] = requant_json(q.requant);
            if (q.kind == ir::LayerKind::ResidualAdd) {
                ojson p;
                p["mantissa_a"] = q.pair.fixed.mantissa_a;
                p["mantissa_b"] = q.pair.fixed.mantissa_b;
                p["shift"] = q.pair.fixed.shift;
                p["real_a"] = q.pair.real_a;
                p["real_b"] = q.pair.real_b;
                quant["pair"] = std::move(p);
            }
            if (!q.logit_scale.empty())
                quant["logit_scale"] = q.logit_scale;
            jl["quantization"] = std::move(quant);

            if (q.is_weighted()) {
                ojson tensors;
                const auto wtype = q.weight_spec.mode == QuantMode::Asymmetric ? ir::BlobType::U8 : ir::BlobType::I8;
                const auto wrel = (blob_dir / ir::detail::blob_file_name(q.name, "weight")).generic_string();
                ir::write_blob(base / wrel, q.weights.data(), wtype);
                tensors["weight"] = ir::detail::tensor_ref(wrel, q.weights.dims(), wtype);
                const auto brel = (blob_dir / ir::detail::blob_file_name(q.name, "bias")).generic_string();
                ir::write_blob(base / brel, q.bias, ir::BlobType::I32);
                tensors["bias"] = ir::detail::tensor_ref(brel, {q.m}, ir::BlobType::I32);
                jl["tensors"] = std::move(tensors);
            }
            layers.push_back(std::move(jl));
        }
    }
    j["layers"] = std::move(layers);
    ir::detail::write_text_file(manifest_path, j.dump(2) + "\n");
}

QNetModel load_qnet(const std::filesystem::path& manifest_path) {
    const json j = ir::detail::read_json_file(manifest_path);
    const auto base = manifest_path.parent_path();
    ir::NetworkGraph header;
    ir::detail::parse_header(j, header);

    QNetModel model;
    model.arch_name = header.arch_name;
    model.alpha = header.alpha;
    model.input_resolution = header.input_resolution;
    model.input_channels = header.input_channels;
    model.tail_min_width = header.tail_min_width;

    std::vector<std::pair<std::size_t, ir::Layer>> structural;
    std::vector<QLayer> qlayers;
    try {
        const auto& qj = j.at("quantization");
        if (qj.at("format_version").get<int>() != kQNetFormatVersion)
            throw ManifestError("unsupported QNet format_version");
        model.bw = qj.at("bw").get<int>();
        model.requant_mode = requant_mode_from_string(qj.at("requant_mode").get<std::string>());
        model.input_spec = parse_spec(qj.at("input_spec"));

        if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty())
            throw ManifestError("no layers");
        for (const auto& jl : j["layers"]) {
            ir::Layer l = ir::detail::parse_layer_structure(jl);
            QLayer q;
            q.name = l.name;
            q.kind = l.kind;
            q.n = l.n;
            q.m = l.m;
            q.k = l.k;
            q.stride = l.stride;
            q.groups = l.groups;
            const auto& quant = jl.at("quantization");
            q.act = activation_from_string(quant.at("activation").get<std::string>());
            q.in_spec = parse_spec(quant.at("in_spec"));
            if (quant.contains("aux_spec"))
                q.aux_spec = parse_spec(quant["aux_spec"]);
            if (quant.contains("out_spec"))
                q.out_spec = parse_spec(quant["out_spec"]);
            if (quant.contains("requant"))
                q.requant = parse_requant(quant["requant"]);
            if (quant.contains("pair")) {
                const auto& p = quant["pair"];
                q.pair.fixed = {p.at("mantissa_a").get<std::int64_t>(), p.at("mantissa_b").get<std::int64_t>(),
                                p.at("shift").get<int>()};
                q.pair.real_a = p.at("real_a").get<double>();
                q.pair.real_b = p.at("real_b").get<double>();
            }
            if (quant.contains("logit_scale"))
                q.logit_scale = quant["logit_scale"].get<std::vector<double>>();
            if (q.is_weighted()) {
                q.weight_spec = parse_spec(quant.at("weight_spec"));
                const auto& tensors = jl.at("tensors");
                const auto w = ir::detail::parse_tensor_ref(tensors.at("weight"), base);
                if (w.shape != l.weight_dims())
                    throw ManifestError("layer '" + l.name + "': weight shape " + ir::shape_string(w.shape) +
                                        " does not match " + ir::shape_string(l.weight_dims()));
                q.weights = ir::IntTensor(w.shape, ir::read_int_blob(w.path, w.count(), w.type));
                const auto bias = ir::detail::parse_tensor_ref(tensors.at("bias"), base);
                if (bias.shape != std::vector<int>{l.m} || bias.type != ir::BlobType::I32)
                    throw ManifestError("layer '" + l.name + "': bias must be an i32 vector of length M");
                q.bias = ir::read_int_blob(bias.path, bias.count(), bias.type);
            }
            structural.emplace_back(ir::detail::parse_block_index(jl), std::move(l));
            qlayers.push_back(std::move(q));
        }
    } catch (const json::exception& e) {
        throw ManifestError(std::string("malformed QNet manifest: ") + e.what());
    }

    ir::NetworkGraph g = header;
    g.blocks = ir::detail::assemble_blocks(std::move(structural));
    ir::validate(g);
    const auto roles = ir::infer_roles(g);
    std::size_t next = 0;
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        QBlock qb{g.blocks[b].kind, g.blocks[b].residual, {}};
        for (std::size_t i = 0; i < g.blocks[b].layers.size(); ++i) {
            QLayer q = std::move(qlayers[next++]);
            q.role = roles[b][i];
            qb.layers.push_back(std::move(q));
        }
        model.blocks.push_back(std::move(qb));
    }
    return model;
}

} // namespace qnet::frontend
