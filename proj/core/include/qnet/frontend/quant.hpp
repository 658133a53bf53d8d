// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "qnet/ir/tensor.hpp"

namespace qnet::frontend {

enum class QuantMode { Asymmetric, Symmetric };
enum class Granularity { PerLayer, PerChannel };

std::string_view to_string(QuantMode m);
std::string_view to_string(Granularity g);
QuantMode quant_mode_from_string(std::string_view s);
Granularity granularity_from_string(std::string_view s);

inline constexpr int kMinBitWidth = 2;
inline constexpr int kMaxBitWidth = 8;

/// Rounds to nearest, ties away from zero. The single rounding mode used by
/// every quantization and requantization path.
std::int64_t round_half_away(double x);

/// Integer division rounding ties away from zero; `den` > 0.
std::int64_t div_round_half_away(std::int64_t num, std::int64_t den);

/// Range-based linear quantization parameters for one tensor. Real values
/// are recovered as x = scale * (q - zero_point). Per-channel specs carry
/// one (scale, zero_point) pair per output channel (dimension 0).
struct QuantSpec {
    std::vector<double> scale;
    std::vector<std::int32_t> zero_point;
    int bw = 8;
    QuantMode mode = QuantMode::Asymmetric;
    Granularity granularity = Granularity::PerLayer;
    double clip_lo = -std::numeric_limits<double>::infinity();
    double clip_hi = std::numeric_limits<double>::infinity();

    std::int32_t qmin() const;
    std::int32_t qmax() const;
    std::size_t channels() const { return scale.size(); }

    double scale_at(std::size_t c) const { return scale[granularity == Granularity::PerChannel ? c : 0]; }
    std::int32_t zero_at(std::size_t c) const {
        return zero_point[granularity == Granularity::PerChannel ? c : 0];
    }

    /// Integer clamp bounds for channel c: the quantized domain narrowed by
    /// the clip range.
    std::pair<std::int32_t, std::int32_t> bounds(std::size_t c = 0) const;

    bool operator==(const QuantSpec&) const = default;
};

/// Per-layer spec from a real range. The range is first widened to contain
/// zero (so that zero is exactly representable); a degenerate range is
/// widened by 1e-6 on both sides. Throws QuantError for BW outside [2, 8]
/// or min > max.
QuantSpec make_quant_spec(double min_x, double max_x, int bw, QuantMode mode = QuantMode::Asymmetric);

/// Per-channel spec from per-channel ranges.
QuantSpec make_per_channel_spec(std::span<const double> mins, std::span<const double> maxs, int bw,
                                QuantMode mode = QuantMode::Asymmetric);

std::int32_t quantize_value(double x, double scale, std::int32_t zero, std::int32_t qmin, std::int32_t qmax);
inline double dequantize_value(std::int32_t q, double scale, std::int32_t zero) {
    return scale * (static_cast<double>(q) - zero);
}

/// Quantizes a tensor; per-channel specs index dimension 0. Values outside
/// the representable range saturate.
ir::IntTensor quantize_tensor(const ir::FloatTensor& t, const QuantSpec& spec);
ir::FloatTensor dequantize_tensor(const ir::IntTensor& t, const QuantSpec& spec);

/// Real multiplier m > 0 stored as mantissa * 2^-shift with a 31-bit
/// normalized mantissa in [2^30, 2^31).
struct FixedMultiplier {
    std::int32_t mantissa = 0;
    int shift = 0;

    static FixedMultiplier from_real(double m);
    double to_real() const;

    /// round_half_away(value * m) computed in 64-bit integer arithmetic.
    std::int64_t apply(std::int64_t value) const;

    bool operator==(const FixedMultiplier&) const = default;
};

/// Two multipliers sharing one shift so that a * ma + b * mb is rounded once.
struct FixedMultiplierPair {
    std::int64_t mantissa_a = 0;
    std::int64_t mantissa_b = 0;
    int shift = 0;

    static FixedMultiplierPair from_real(double ma, double mb);
    std::int64_t apply(std::int64_t a, std::int64_t b) const;

    bool operator==(const FixedMultiplierPair&) const = default;
};

/// Shift right with round-half-away-from-zero; shift >= 0.
std::int64_t rounding_shift(std::int64_t value, int shift);

enum class RequantMode { FixedPoint, Real };
std::string_view to_string(RequantMode m);
RequantMode requant_mode_from_string(std::string_view s);

/// Requantization multiplier of one output channel in both realizations.
struct Requant {
    FixedMultiplier fixed;
    double real = 0.0;

    static Requant from_real(double m) { return {FixedMultiplier::from_real(m), m}; }
    std::int64_t apply(std::int64_t acc, RequantMode mode) const;

    bool operator==(const Requant&) const = default;
};

/// Residual-add requantization: out = round(a * ma + b * mb).
struct RequantPair {
    FixedMultiplierPair fixed;
    double real_a = 0.0;
    double real_b = 0.0;

    static RequantPair from_real(double ma, double mb);
    std::int64_t apply(std::int64_t a, std::int64_t b, RequantMode mode) const;

    bool operator==(const RequantPair&) const = default;
};

} // namespace qnet::frontend
