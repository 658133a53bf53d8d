// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/ir/manifest.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "manifest_json.hpp"

namespace qnet::ir {

namespace detail {

ojson header_json(const NetworkGraph& g) {
    ojson j;
    j["format_version"] = kManifestFormatVersion;
    j["arch_name"] = g.arch_name;
    j["alpha"] = g.alpha;
    j["input_resolution"] = g.input_resolution;
    j["input_channels"] = g.input_channels;
    j["tail_min_width"] = g.tail_min_width;
    return j;
}

void parse_header(const json& j, NetworkGraph& g) {
    if (!j.is_object())
        throw ManifestError("malformed manifest: top level must be an object");
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kManifestFormatVersion)
            throw ManifestError("unsupported manifest format_version " + std::to_string(version));
        g.arch_name = j.at("arch_name").get<std::string>();
        g.alpha = j.at("alpha").get<double>();
        g.input_resolution = j.at("input_resolution").get<int>();
        g.input_channels = j.value("input_channels", 3);
        g.tail_min_width = j.value("tail_min_width", false);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("malformed manifest: ") + e.what());
    }
}

ojson layer_structure_json(const Layer& l, std::size_t block) {
    ojson j;
    j["name"] = l.name;
    j["block"] = block;
    j["kind"] = std::string(to_string(l.kind));
    j["N"] = l.n;
    j["M"] = l.m;
    j["K"] = l.k;
    j["stride"] = l.stride;
    j["groups"] = l.groups;
    if (l.kind == LayerKind::BatchNorm)
        j["eps"] = l.bn.eps;
    return j;
}

std::size_t parse_block_index(const json& j) {
    try {
        return j.at("block").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ManifestError(std::string("malformed manifest layer: ") + e.what());
    }
}

Layer parse_layer_structure(const json& j) {
    Layer l;
    try {
        l.name = j.at("name").get<std::string>();
        l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
        l.n = j.at("N").get<int>();
        l.m = j.at("M").get<int>();
        l.k = j.value("K", 1);
        l.stride = j.value("stride", 1);
        l.groups = j.value("groups", 1);
        if (l.kind == LayerKind::BatchNorm)
            l.bn.eps = j.value("eps", 1e-5);
    } catch (const json::exception& e) {
        throw ManifestError(std::string("malformed manifest layer: ") + e.what());
    }
    if (l.n <= 0 || l.m <= 0 || l.k <= 0 || l.stride <= 0 || l.groups <= 0)
        throw ManifestError("layer '" + l.name + "': channel counts, K, stride and groups must be positive");
    return l;
}

std::vector<Block> assemble_blocks(std::vector<std::pair<std::size_t, Layer>> layers) {
    std::vector<Block> blocks;
    for (auto& [index, layer] : layers) {
        if (index > blocks.size())
            throw ManifestError("layer '" + layer.name + "' skips block index " + std::to_string(blocks.size()));
        if (index + 1 < blocks.size())
            throw ManifestError("layer '" + layer.name + "' is out of block order");
        if (index == blocks.size())
            blocks.emplace_back();
        blocks.back().layers.push_back(std::move(layer));
    }
    for (auto& b : blocks) {
        bool dw = false, pw = false;
        for (const auto& l : b.layers) {
            dw |= l.kind == LayerKind::DepthwiseConv;
            pw |= l.kind == LayerKind::PointwiseConv;
            b.residual |= l.kind == LayerKind::ResidualAdd;
        }
        b.kind = (dw && pw) ? BlockKind::InvertedResidual : BlockKind::Plain;
    }
    return blocks;
}

std::string blob_file_name(const std::string& layer, const std::string& tensor) {
    std::string s;
    for (char c : layer)
        s += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
    return s + "." + tensor + ".bin";
}

ojson tensor_ref(const std::string& rel_path, const std::vector<int>& shape, BlobType type) {
    ojson j;
    j["file"] = rel_path;
    j["shape"] = shape;
    j["dtype"] = std::string(to_string(type));
    return j;
}

std::size_t TensorRef::count() const {
    std::size_t n = 1;
    for (int d : shape)
        n *= static_cast<std::size_t>(d);
    return n;
}

TensorRef parse_tensor_ref(const json& j, const std::filesystem::path& base) {
    try {
        TensorRef r;
        r.path = base / j.at("file").get<std::string>();
        r.shape = j.at("shape").get<std::vector<int>>();
        r.type = blob_type_from_string(j.at("dtype").get<std::string>());
        for (int d : r.shape)
            if (d <= 0)
                throw ManifestError("non-positive tensor dimension in " + r.path.string());
        return r;
    } catch (const json::exception& e) {
        throw ManifestError(std::string("malformed tensor reference: ") + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f)
        throw ManifestError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ManifestError("malformed manifest " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw ManifestError("cannot write " + path.string());
    f << text;
}

} // namespace detail

using namespace detail;

std::filesystem::path blob_dir_for(const std::filesystem::path& manifest_path) {
    return manifest_path.stem().string() + "_blobs";
}

NetworkGraph load_model(const std::filesystem::path& manifest_path) {
    const json j = read_json_file(manifest_path);
    const auto base = manifest_path.parent_path();
    NetworkGraph g;
    parse_header(j, g);

    if (!j.contains("layers") || !j["layers"].is_array())
        throw ManifestError("malformed manifest: missing layers[]");
    if (j["layers"].empty())
        throw ManifestError("no layers");

    std::vector<std::pair<std::size_t, Layer>> layers;
    for (const auto& jl : j["layers"]) {
        Layer l = parse_layer_structure(jl);
        const auto tensors = jl.value("tensors", json::object());
        auto load_f32 = [&](const char* key, std::vector<int> expect) -> std::vector<float> {
            if (!tensors.contains(key))
                return {};
            const TensorRef r = parse_tensor_ref(tensors[key], base);
            if (r.type != BlobType::F32)
                throw ManifestError("layer '" + l.name + "': float manifest expects f32 blobs");
            if (!expect.empty() && r.shape != expect)
                throw ManifestError("layer '" + l.name + "': " + key + " shape " + shape_string(r.shape) +
                                    " does not match " + shape_string(expect));
            return read_f32_blob(r.path, r.count());
        };
        if (l.is_weighted()) {
            auto w = load_f32("weight", l.weight_dims());
            if (!w.empty())
                l.weights = FloatTensor(l.weight_dims(), std::move(w));
            l.bias = load_f32("bias", {l.m});
        } else if (l.kind == LayerKind::BatchNorm) {
            l.bn.gamma = load_f32("gamma", {l.m});
            l.bn.beta = load_f32("beta", {l.m});
            l.bn.mean = load_f32("mean", {l.m});
            l.bn.var = load_f32("var", {l.m});
        }
        layers.emplace_back(parse_block_index(jl), std::move(l));
    }
    g.blocks = assemble_blocks(std::move(layers));
    validate(g);
    return g;
}

void save_model(const NetworkGraph& graph, const std::filesystem::path& manifest_path) {
    validate(graph);
    const auto base = manifest_path.parent_path();
    const auto blob_dir = blob_dir_for(manifest_path);

    ojson j = header_json(graph);
    ojson layers = ojson::array();
    for (std::size_t b = 0; b < graph.blocks.size(); ++b) {
        for (const Layer& l : graph.blocks[b].layers) {
            ojson jl = layer_structure_json(l, b);
            ojson tensors = ojson::object();
            auto emit = [&](const std::string& key, std::span<const float> data, std::vector<int> shape) {
                const auto rel = (blob_dir / blob_file_name(l.name, key)).generic_string();
                write_blob(base / rel, data);
                tensors[key] = tensor_ref(rel, shape, BlobType::F32);
            };
            if (l.is_weighted() && l.has_weights())
                emit("weight", l.weights.data(), l.weight_dims());
            if (!l.bias.empty())
                emit("bias", l.bias, {l.m});
            if (l.kind == LayerKind::BatchNorm && !l.bn.gamma.empty()) {
                emit("gamma", l.bn.gamma, {l.m});
                emit("beta", l.bn.beta, {l.m});
                emit("mean", l.bn.mean, {l.m});
                emit("var", l.bn.var, {l.m});
            }
            if (!tensors.empty())
                jl["tensors"] = std::move(tensors);
            layers.push_back(std::move(jl));
        }
    }
    j["layers"] = std::move(layers);
    write_text_file(manifest_path, j.dump(2) + "\n");
}

} // namespace qnet::ir
