// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/quant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace qnet::frontend {

namespace {

constexpr double kDegenerateWiden = 1e-6;

void check_bw(int bw) {
    if (bw < kMinBitWidth || bw > kMaxBitWidth)
        throw QuantError("bit width " + std::to_string(bw) + " outside [2, 8]");
}

std::int32_t domain_min(int bw, QuantMode mode) { return mode == QuantMode::Asymmetric ? 0 : -(1 << (bw - 1)); }
std::int32_t domain_max(int bw, QuantMode mode) {
    return mode == QuantMode::Asymmetric ? (1 << bw) - 1 : (1 << (bw - 1)) - 1;
}

std::pair<double, std::int32_t> range_params(double min_x, double max_x, int bw, QuantMode mode) {
    if (!(min_x <= max_x))
        throw QuantError("quantization range min " + std::to_string(min_x) + " exceeds max " + std::to_string(max_x));
    if (!std::isfinite(min_x) || !std::isfinite(max_x))
        throw QuantError("quantization range must be finite");
    double lo = std::min(min_x, 0.0);
    double hi = std::max(max_x, 0.0);
    if (lo == hi) {
        lo -= kDegenerateWiden;
        hi += kDegenerateWiden;
    }
    const std::int32_t qmin = domain_min(bw, mode);
    const std::int32_t qmax = domain_max(bw, mode);
    if (mode == QuantMode::Symmetric)
        return {std::max(-lo, hi) / qmax, 0};

    double scale = (hi - lo) / qmax;
    std::int32_t zero = 0;
    // Independent rounding of lo/S and hi/S can lose the top code when both
    // sit just below a half; shrink S by an ulp until the endpoints land on
    // the domain ends.
    for (int attempt = 0; attempt < 8; ++attempt) {
        zero = static_cast<std::int32_t>(std::clamp<std::int64_t>(round_half_away(-lo / scale), qmin, qmax));
        if (quantize_value(hi, scale, zero, qmin, qmax) == qmax && quantize_value(lo, scale, zero, qmin, qmax) == qmin)
            break;
        scale = std::nextafter(scale, 0.0);
    }
    return {scale, zero};
}

} // namespace

std::string_view to_string(QuantMode m) { return m == QuantMode::Asymmetric ? "asymmetric" : "symmetric"; }
std::string_view to_string(Granularity g) { return g == Granularity::PerLayer ? "per-layer" : "per-channel"; }
std::string_view to_string(RequantMode m) { return m == RequantMode::FixedPoint ? "fixed-point" : "real"; }

QuantMode quant_mode_from_string(std::string_view s) {
    if (s == "asymmetric")
        return QuantMode::Asymmetric;
    if (s == "symmetric")
        return QuantMode::Symmetric;
    throw QuantError("unknown quantization mode '" + std::string(s) + "'");
}

Granularity granularity_from_string(std::string_view s) {
    if (s == "per-layer")
        return Granularity::PerLayer;
    if (s == "per-channel")
        return Granularity::PerChannel;
    throw QuantError("unknown granularity '" + std::string(s) + "'");
}

RequantMode requant_mode_from_string(std::string_view s) {
    if (s == "fixed-point")
        return RequantMode::FixedPoint;
    if (s == "real")
        return RequantMode::Real;
    throw QuantError("unknown requantization mode '" + std::string(s) + "'");
}

std::int64_t round_half_away(double x) {
    constexpr double kLimit = 0x1.0p62;
    if (std::isnan(x))
        throw QuantError("cannot round NaN");
    return std::llround(std::clamp(x, -kLimit, kLimit));
}

std::int64_t div_round_half_away(std::int64_t num, std::int64_t den) {
    return num >= 0 ? (num + den / 2) / den : -((-num + den / 2) / den);
}

std::int32_t QuantSpec::qmin() const { return domain_min(bw, mode); }
std::int32_t QuantSpec::qmax() const { return domain_max(bw, mode); }

std::pair<std::int32_t, std::int32_t> QuantSpec::bounds(std::size_t c) const {
    std::int32_t lo = qmin();
    std::int32_t hi = qmax();
    if (std::isfinite(clip_lo))
        lo = std::max(lo, quantize_value(clip_lo, scale_at(c), zero_at(c), qmin(), qmax()));
    if (std::isfinite(clip_hi))
        hi = std::min(hi, quantize_value(clip_hi, scale_at(c), zero_at(c), qmin(), qmax()));
    return {lo, hi};
}

QuantSpec make_quant_spec(double min_x, double max_x, int bw, QuantMode mode) {
    check_bw(bw);
    auto [s, z] = range_params(min_x, max_x, bw, mode);
    QuantSpec spec;
    spec.scale = {s};
    spec.zero_point = {z};
    spec.bw = bw;
    spec.mode = mode;
    spec.granularity = Granularity::PerLayer;
    return spec;
}

QuantSpec make_per_channel_spec(std::span<const double> mins, std::span<const double> maxs, int bw,
                                QuantMode mode) {
    check_bw(bw);
    if (mins.size() != maxs.size() || mins.empty())
        throw QuantError("per-channel ranges need matching non-empty min/max vectors");
    QuantSpec spec;
    spec.bw = bw;
    spec.mode = mode;
    spec.granularity = Granularity::PerChannel;
    for (std::size_t c = 0; c < mins.size(); ++c) {
        auto [s, z] = range_params(mins[c], maxs[c], bw, mode);
        spec.scale.push_back(s);
        spec.zero_point.push_back(z);
    }
    return spec;
}

std::int32_t quantize_value(double x, double scale, std::int32_t zero, std::int32_t qmin, std::int32_t qmax) {
    const std::int64_t q = round_half_away(x / scale) + zero;
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(q, qmin, qmax));
}

namespace {

std::size_t channel_stride(const std::vector<int>& dims, const QuantSpec& spec) {
    if (spec.scale.empty() || spec.scale.size() != spec.zero_point.size())
        throw QuantError("quantization spec has no parameters");
    if (spec.granularity == Granularity::PerLayer)
        return 0;
    if (dims.empty() || static_cast<std::size_t>(dims[0]) != spec.channels())
        throw QuantError("per-channel spec with " + std::to_string(spec.channels()) +
                         " channels does not match tensor shape " + ir::shape_string(dims));
    return ir::FloatTensor::element_count(dims) / dims[0];
}

} // namespace

ir::IntTensor quantize_tensor(const ir::FloatTensor& t, const QuantSpec& spec) {
    const std::size_t stride = channel_stride(t.dims(), spec);
    ir::IntTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t c = stride ? i / stride : 0;
        out[i] = quantize_value(t[i], spec.scale_at(c), spec.zero_at(c), spec.qmin(), spec.qmax());
    }
    return out;
}

ir::FloatTensor dequantize_tensor(const ir::IntTensor& t, const QuantSpec& spec) {
    const std::size_t stride = channel_stride(t.dims(), spec);
    ir::FloatTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t c = stride ? i / stride : 0;
        out[i] = static_cast<float>(dequantize_value(t[i], spec.scale_at(c), spec.zero_at(c)));
    }
    return out;
}

std::int64_t rounding_shift(std::int64_t value, int shift) {
    if (shift == 0)
        return value;
    if (shift >= 64)
        return 0;
    const std::uint64_t mag = value < 0 ? 0 - static_cast<std::uint64_t>(value) : static_cast<std::uint64_t>(value);
    const std::uint64_t r = (mag >> shift) + ((mag >> (shift - 1)) & 1u);
    return value < 0 ? -static_cast<std::int64_t>(r) : static_cast<std::int64_t>(r);
}

FixedMultiplier FixedMultiplier::from_real(double m) {
    if (!(m > 0.0) || !std::isfinite(m))
        throw QuantError("requantization multiplier must be positive and finite");
    int exp = 0;
    const double frac = std::frexp(m, &exp);
    std::int64_t mant = std::llround(std::ldexp(frac, 31));
    if (mant == (std::int64_t{1} << 31)) {
        mant >>= 1;
        ++exp;
    }
    const int shift = 31 - exp;
    if (shift < 0)
        throw QuantError("requantization multiplier " + std::to_string(m) + " too large for fixed point");
    return {static_cast<std::int32_t>(mant), shift};
}

double FixedMultiplier::to_real() const { return std::ldexp(static_cast<double>(mantissa), -shift); }

std::int64_t FixedMultiplier::apply(std::int64_t value) const {
    return rounding_shift(value * mantissa, shift);
}

FixedMultiplierPair FixedMultiplierPair::from_real(double ma, double mb) {
    if (!(ma > 0.0) || !(mb > 0.0) || !std::isfinite(ma) || !std::isfinite(mb))
        throw QuantError("requantization multipliers must be positive and finite");
    int exp = 0;
    std::frexp(std::max(ma, mb), &exp);
    const int shift = 31 - exp;
    if (shift < 0)
        throw QuantError("requantization multiplier too large for fixed point");
    return {std::llround(std::ldexp(ma, shift)), std::llround(std::ldexp(mb, shift)), shift};
}

std::int64_t FixedMultiplierPair::apply(std::int64_t a, std::int64_t b) const {
    return rounding_shift(a * mantissa_a + b * mantissa_b, shift);
}

std::int64_t Requant::apply(std::int64_t acc, RequantMode mode) const {
    if (mode == RequantMode::FixedPoint)
        return fixed.apply(acc);
    return round_half_away(static_cast<double>(acc) * real);
}

RequantPair RequantPair::from_real(double ma, double mb) {
    return {FixedMultiplierPair::from_real(ma, mb), ma, mb};
}

std::int64_t RequantPair::apply(std::int64_t a, std::int64_t b, RequantMode mode) const {
    if (mode == RequantMode::FixedPoint)
        return fixed.apply(a, b);
    return round_half_away(static_cast<double>(a) * real_a + static_cast<double>(b) * real_b);
}

} // namespace qnet::frontend
