// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qnet/ir/graph.hpp"

namespace qnet::frontend {

/// Per-channel running range of one activation tensor.
struct ChannelRange {
    std::vector<double> min;
    std::vector<double> max;

    double tensor_min() const;
    double tensor_max() const;
    void merge(const ChannelRange& other);

    bool operator==(const ChannelRange&) const = default;
};

/// Activation ranges keyed by the producing layer name; the network input
/// is recorded under kInputKey.
struct CalibrationStats {
    static constexpr const char* kInputKey = "@input";

    std::map<std::string, ChannelRange> ranges;
    std::size_t samples = 0;

    const ChannelRange& at(const std::string& layer) const;
    /// Elementwise min/max merge; associative and commutative.
    void merge(const CalibrationStats& other);

    bool operator==(const CalibrationStats&) const = default;
};

/// Runs float forward passes over the dataset and records exact per-channel
/// min/max of every layer output. Samples are split over `threads` workers
/// and merged, which gives the same result for any thread count. Throws
/// QuantError for an empty dataset or a NaN activation.
CalibrationStats calibrate(const ir::NetworkGraph& model, const std::vector<ir::FloatTensor>& dataset,
                           unsigned threads = 1);

void save_stats(const CalibrationStats& stats, const std::filesystem::path& path);
CalibrationStats load_stats(const std::filesystem::path& path);

} // namespace qnet::frontend
