// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/runtime/memory.hpp"

#include <algorithm>
#include <bit>

#include "qnet/error.hpp"

namespace qnet::runtime {

using frontend::QLayer;
using soc::OpType;

SharedMemoryImage::SharedMemoryImage(const soc::Schedule& schedule)
    : regions_(schedule.regions), bytes_(schedule.total_bytes, 0), written_(schedule.total_bytes, 0) {}

const soc::Region& SharedMemoryImage::region(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= regions_.size())
        throw MemoryError("no region " + std::to_string(index));
    return regions_[static_cast<std::size_t>(index)];
}

void SharedMemoryImage::check_range(int index, std::uint64_t offset, std::uint64_t len) const {
    const soc::Region& r = region(index);
    if (offset > r.bytes || len > r.bytes - offset)
        throw MemoryError("access [" + std::to_string(offset) + ", " + std::to_string(offset + len) +
                          ") overflows region '" + r.name + "' of " + std::to_string(r.bytes) + " bytes");
}

void SharedMemoryImage::check_writable(int index) const {
    if (sealed_ && region(index).read_only())
        throw MemoryError("write to read-only region '" + region(index).name + "'");
}

void SharedMemoryImage::check_written(int index, std::uint64_t abs, std::uint64_t len) const {
    for (std::uint64_t i = 0; i < len; ++i)
        if (!written_[abs + i])
            throw MemoryError("read of unwritten byte " + std::to_string(abs + i - region(index).offset) +
                              " in region '" + region(index).name + "'");
}

void SharedMemoryImage::write(int index, std::uint64_t offset, std::span<const std::uint8_t> data) {
    check_range(index, offset, data.size());
    check_writable(index);
    const std::uint64_t abs = region(index).offset + offset;
    std::copy(data.begin(), data.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(abs));
    std::fill_n(written_.begin() + static_cast<std::ptrdiff_t>(abs), data.size(), 1);
}

void SharedMemoryImage::read(int index, std::uint64_t offset, std::span<std::uint8_t> out) const {
    check_range(index, offset, out.size());
    const std::uint64_t abs = region(index).offset + offset;
    check_written(index, abs, out.size());
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(abs), out.size(), out.begin());
}

void SharedMemoryImage::write_code(int index, std::uint64_t i, int bw, std::int32_t value, std::uint64_t base) {
    if (bw < 1 || bw > 32)
        throw MemoryError("unsupported code width " + std::to_string(bw));
    if (bw < 32) {
        const std::int64_t lo = -(std::int64_t{1} << (bw - 1)), hi = (std::int64_t{1} << bw) - 1;
        if (value < lo || value > hi)
            throw MemoryError("code " + std::to_string(value) + " does not fit " + std::to_string(bw) + " bits");
    }
    const std::uint64_t bit = base * 8 + i * static_cast<std::uint64_t>(bw);
    const std::uint64_t first = bit / 8, last = (bit + bw - 1) / 8;
    check_range(index, first, last - first + 1);
    check_writable(index);
    const std::uint64_t abs = region(index).offset;
    const std::uint64_t mask = (std::uint64_t{1} << bw) - 1;
    const std::uint64_t v = static_cast<std::uint64_t>(static_cast<std::uint32_t>(value)) & mask;
    for (int b = 0; b < bw; ++b) {
        const std::uint64_t pos = bit + static_cast<std::uint64_t>(b);
        std::uint8_t& byte = bytes_[abs + pos / 8];
        const std::uint8_t m = static_cast<std::uint8_t>(1u << (pos % 8));
        byte = static_cast<std::uint8_t>(((v >> b) & 1u) ? (byte | m) : (byte & ~m));
    }
    std::fill(written_.begin() + static_cast<std::ptrdiff_t>(abs + first),
              written_.begin() + static_cast<std::ptrdiff_t>(abs + last + 1), 1);
}

std::int32_t SharedMemoryImage::read_code(int index, std::uint64_t i, int bw, bool is_signed,
                                          std::uint64_t base) const {
    if (bw < 1 || bw > 32)
        throw MemoryError("unsupported code width " + std::to_string(bw));
    const std::uint64_t bit = base * 8 + i * static_cast<std::uint64_t>(bw);
    const std::uint64_t first = bit / 8, last = (bit + bw - 1) / 8;
    check_range(index, first, last - first + 1);
    const std::uint64_t abs = region(index).offset;
    check_written(index, abs + first, last - first + 1);
    std::uint64_t v = 0;
    for (int b = 0; b < bw; ++b) {
        const std::uint64_t pos = bit + static_cast<std::uint64_t>(b);
        v |= static_cast<std::uint64_t>((bytes_[abs + pos / 8] >> (pos % 8)) & 1u) << b;
    }
    if (is_signed && bw < 64 && (v >> (bw - 1)) & 1u)
        v |= ~((std::uint64_t{1} << bw) - 1);
    return static_cast<std::int32_t>(static_cast<std::int64_t>(v));
}

void SharedMemoryImage::invalidate(int index) {
    check_writable(index);
    const soc::Region& r = region(index);
    std::fill_n(written_.begin() + static_cast<std::ptrdiff_t>(r.offset), r.bytes, 0);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
    const auto u = static_cast<std::uint64_t>(v);
    put_u32(out, static_cast<std::uint32_t>(u));
    put_u32(out, static_cast<std::uint32_t>(u >> 32));
}
void put_f64(std::vector<std::uint8_t>& out, double v) { put_i64(out, std::bit_cast<std::int64_t>(v)); }

struct Reader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(data[pos++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return static_cast<std::int64_t>(lo | (hi << 32));
    }
    double f64() { return std::bit_cast<double>(i64()); }
};

bool has_spec(const frontend::QuantSpec& s) { return !s.scale.empty(); }

struct Header {
    std::int32_t in_zero = 0, out_zero = 0, lo = 0, hi = 0;
    bool operator==(const Header&) const = default;
};

Header header_of(const QLayer& l) {
    Header h;
    h.in_zero = has_spec(l.in_spec) ? l.in_spec.zero_at(0) : 0;
    if (has_spec(l.out_spec)) {
        h.out_zero = l.out_spec.zero_at(0);
        std::tie(h.lo, h.hi) = l.out_spec.bounds();
    }
    return h;
}

std::vector<std::uint8_t> encode_qparams(const QLayer& l, OpType type) {
    std::vector<std::uint8_t> out;
    const Header h = header_of(l);
    put_i32(out, h.in_zero);
    put_i32(out, h.out_zero);
    put_i32(out, h.lo);
    put_i32(out, h.hi);
    if (soc::is_mac_type(type)) {
        const bool dense = l.kind == ir::LayerKind::Dense;
        for (int m = 0; m < l.m; ++m) {
            put_i32(out, l.bias.empty() ? 0 : l.bias[static_cast<std::size_t>(m)]);
            put_i32(out, l.weight_spec.zero_at(static_cast<std::size_t>(m)));
            if (dense) {
                put_i32(out, 0);
                put_i32(out, 0);
                put_f64(out, l.logit_scale.at(static_cast<std::size_t>(m)));
            } else {
                const auto& rq = l.requant.at(static_cast<std::size_t>(m));
                put_i32(out, rq.fixed.mantissa);
                put_i32(out, rq.fixed.shift);
                put_f64(out, rq.real);
            }
        }
    } else if (type == OpType::SeScale) {
        const auto& rq = l.requant.at(0);
        put_i32(out, 0);
        put_i32(out, 0);
        put_i32(out, rq.fixed.mantissa);
        put_i32(out, rq.fixed.shift);
        put_f64(out, rq.real);
    } else if (type == OpType::ResidualAdd) {
        put_i32(out, l.aux_spec.zero_at(0));
        put_i32(out, l.pair.fixed.shift);
        put_i64(out, l.pair.fixed.mantissa_a);
        put_i64(out, l.pair.fixed.mantissa_b);
        put_f64(out, l.pair.real_a);
        put_f64(out, l.pair.real_b);
    }
    return out;
}

const QLayer& model_layer(const frontend::QNetModel& model, const soc::LayerParams& p) {
    if (p.block >= model.blocks.size() || p.layer >= model.blocks[p.block].layers.size())
        throw PlanError("plan layer '" + p.name + "' is not in the model");
    return model.blocks[p.block].layers[p.layer];
}

soc::OpType slot_type(const soc::HardwarePlan& plan, const soc::Invocation& inv, const soc::LayerParams& p) {
    return plan.cu(inv.cu).slots.at(static_cast<std::size_t>(p.slot)).type;
}

} // namespace

std::vector<LayerParamOffsets> param_offsets(const soc::HardwarePlan& plan, const soc::Invocation& inv) {
    std::vector<LayerParamOffsets> out;
    LayerParamOffsets cur;
    for (const auto& l : inv.layers) {
        out.push_back(cur);
        cur.weights += soc::weight_bytes(l);
        cur.qparams += soc::qparam_bytes(l, slot_type(plan, inv, l));
    }
    return out;
}

void check_plan_matches(const frontend::QNetModel& model, const soc::HardwarePlan& plan) {
    std::size_t b = 0, i = 0;
    for (const auto& inv : plan.invocations)
        for (const auto& p : inv.layers) {
            while (b < model.blocks.size() && i == model.blocks[b].layers.size()) {
                ++b;
                i = 0;
            }
            if (p.block != b || p.layer != i)
                throw PlanError("plan visits layer '" + p.name + "' out of model order");
            const QLayer& q = model_layer(model, p);
            if (q.name != p.name || q.n != p.n || q.m != p.m || q.k != p.k || q.stride != p.stride ||
                q.groups != p.groups || (q.is_weighted() && q.weight_spec.bw != p.weight_bw))
                throw PlanError("plan layer '" + p.name + "' does not match model layer '" + q.name + "'");
            ++i;
        }
    while (b < model.blocks.size() && i == model.blocks[b].layers.size()) {
        ++b;
        i = 0;
    }
    if (b != model.blocks.size())
        throw PlanError("plan does not cover every model layer");
    if (plan.resolution != model.input_resolution)
        throw PlanError("plan resolution " + std::to_string(plan.resolution) + " differs from model resolution " +
                        std::to_string(model.input_resolution));
}

void initialize_parameters(SharedMemoryImage& image, const frontend::QNetModel& model, const soc::HardwarePlan& plan,
                           const soc::Schedule& schedule) {
    check_plan_matches(model, plan);
    if (schedule.invocations.size() != plan.invocations.size())
        throw PlanError("schedule and plan list different invocations");
    for (const auto& si : schedule.invocations) {
        const auto offsets = param_offsets(plan, si.call);
        for (std::size_t li = 0; li < si.call.layers.size(); ++li) {
            const auto& p = si.call.layers[li];
            const QLayer& q = model_layer(model, p);
            if (q.is_weighted()) {
                const auto w = q.weights.data();
                for (std::size_t e = 0; e < w.size(); ++e)
                    image.write_code(si.weights_region, e, p.weight_bw, w[e], offsets[li].weights);
            }
            image.write(si.qparams_region, offsets[li].qparams, encode_qparams(q, slot_type(plan, si.call, p)));
        }
    }
    image.seal_parameters();
}

LoadedLayer load_layer(const SharedMemoryImage& image, const soc::ScheduledInvocation& si, std::size_t layer_index,
                       const LayerParamOffsets& offsets, soc::OpType type, const QLayer& reference) {
    const auto& p = si.call.layers.at(layer_index);
    LoadedLayer out{reference, 0, 0};
    QLayer& l = out.layer;
    if (reference.is_weighted()) {
        const bool is_signed = reference.weight_spec.mode == frontend::QuantMode::Symmetric;
        auto w = l.weights.data();
        for (std::size_t e = 0; e < w.size(); ++e)
            w[e] = image.read_code(si.weights_region, e, p.weight_bw, is_signed, offsets.weights);
        out.weight_bytes = soc::weight_bytes(p);
    }
    out.qparam_bytes = soc::qparam_bytes(p, type);
    std::vector<std::uint8_t> raw(out.qparam_bytes);
    image.read(si.qparams_region, offsets.qparams, raw);
    Reader r{raw};
    Header h;
    h.in_zero = r.i32();
    h.out_zero = r.i32();
    h.lo = r.i32();
    h.hi = r.i32();
    if (!(h == header_of(reference)))
        throw MemoryError("quantization header of '" + p.name + "' does not match the model");
    if (soc::is_mac_type(type)) {
        const bool dense = l.kind == ir::LayerKind::Dense;
        for (int m = 0; m < l.m; ++m) {
            const auto mi = static_cast<std::size_t>(m);
            const std::int32_t bias = r.i32();
            if (!l.bias.empty())
                l.bias[mi] = bias;
            if (r.i32() != reference.weight_spec.zero_at(mi))
                throw MemoryError("weight zero point of '" + p.name + "' does not match the model");
            const std::int32_t mant = r.i32();
            const int shift = r.i32();
            const double real = r.f64();
            if (dense) {
                l.logit_scale.at(mi) = real;
            } else {
                l.requant.at(mi).fixed = {mant, shift};
                l.requant.at(mi).real = real;
            }
        }
    } else if (type == OpType::SeScale) {
        r.i32();
        r.i32();
        const std::int32_t mant = r.i32();
        const int shift = r.i32();
        l.requant.at(0).fixed = {mant, shift};
        l.requant.at(0).real = r.f64();
    } else if (type == OpType::ResidualAdd) {
        if (r.i32() != reference.aux_spec.zero_at(0))
            throw MemoryError("residual zero point of '" + p.name + "' does not match the model");
        l.pair.fixed.shift = r.i32();
        l.pair.fixed.mantissa_a = r.i64();
        l.pair.fixed.mantissa_b = r.i64();
        l.pair.real_a = r.f64();
        l.pair.real_b = r.f64();
    }
    return out;
}

} // namespace qnet::runtime
