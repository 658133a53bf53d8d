// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/frontend/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "../ir/manifest_json.hpp"
#include "qnet/frontend/float_exec.hpp"

namespace qnet::frontend {

double ChannelRange::tensor_min() const { return *std::min_element(min.begin(), min.end()); }
double ChannelRange::tensor_max() const { return *std::max_element(max.begin(), max.end()); }

void ChannelRange::merge(const ChannelRange& other) {
    if (min.empty()) {
        *this = other;
        return;
    }
    if (other.min.size() != min.size())
        throw QuantError("cannot merge ranges with different channel counts");
    for (std::size_t c = 0; c < min.size(); ++c) {
        min[c] = std::min(min[c], other.min[c]);
        max[c] = std::max(max[c], other.max[c]);
    }
}

const ChannelRange& CalibrationStats::at(const std::string& layer) const {
    auto it = ranges.find(layer);
    if (it == ranges.end())
        throw QuantError("no calibration statistics for '" + layer + "'");
    return it->second;
}

void CalibrationStats::merge(const CalibrationStats& other) {
    for (const auto& [name, r] : other.ranges)
        ranges[name].merge(r);
    samples += other.samples;
}

namespace {

void record(CalibrationStats& stats, const std::string& key, const ir::FloatTensor& t) {
    const int c = t.channels();
    const std::size_t plane = t.size() / c;
    ChannelRange r;
    r.min.assign(c, std::numeric_limits<double>::infinity());
    r.max.assign(c, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = t[i];
        if (std::isnan(v))
            throw QuantError("NaN activation in '" + key + "'");
        const std::size_t ch = i / plane;
        r.min[ch] = std::min(r.min[ch], v);
        r.max[ch] = std::max(r.max[ch], v);
    }
    stats.ranges[key].merge(r);
}

CalibrationStats calibrate_range(const ir::NetworkGraph& model, const std::vector<ir::FloatTensor>& dataset,
                                 std::size_t begin, std::size_t end) {
    CalibrationStats stats;
    for (std::size_t s = begin; s < end; ++s) {
        record(stats, CalibrationStats::kInputKey, dataset[s]);
        forward(model, dataset[s], [&](const ir::Layer& l, const ir::FloatTensor& out) { record(stats, l.name, out); });
        ++stats.samples;
    }
    return stats;
}

} // namespace

CalibrationStats calibrate(const ir::NetworkGraph& model, const std::vector<ir::FloatTensor>& dataset,
                           unsigned threads) {
    if (dataset.empty())
        throw QuantError("calibration dataset is empty");
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, dataset.size());
    if (workers == 1)
        return calibrate_range(model, dataset, 0, dataset.size());

    std::vector<CalibrationStats> partial(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (dataset.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                const std::size_t begin = std::min(dataset.size(), w * chunk);
                partial[w] = calibrate_range(model, dataset, begin, std::min(dataset.size(), begin + chunk));
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    CalibrationStats stats;
    for (const auto& p : partial)
        stats.merge(p);
    return stats;
}

void save_stats(const CalibrationStats& stats, const std::filesystem::path& path) {
    ir::detail::ojson j;
    j["samples"] = stats.samples;
    ir::detail::ojson ranges = ir::detail::ojson::object();
    for (const auto& [name, r] : stats.ranges) {
        ir::detail::ojson jr;
        jr["min"] = r.min;
        jr["max"] = r.max;
        ranges[name] = std::move(jr);
    }
    j["ranges"] = std::move(ranges);
    ir::detail::write_text_file(path, j.dump(2) + "\n");
}

CalibrationStats load_stats(const std::filesystem::path& path) {
    const auto j = ir::detail::read_json_file(path);
    CalibrationStats stats;
    try {
        stats.samples = j.at("samples").get<std::size_t>();
        for (const auto& [name, jr] : j.at("ranges").items()) {
            ChannelRange r{jr.at("min").get<std::vector<double>>(), jr.at("max").get<std::vector<double>>()};
            if (r.min.size() != r.max.size() || r.min.empty())
                throw QuantError("calibration range '" + name + "' is malformed");
            for (std::size_t c = 0; c < r.min.size(); ++c)
                if (!(r.min[c] <= r.max[c]))
                    throw QuantError("calibration range '" + name + "' has min > max");
            stats.ranges.emplace(name, std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw QuantError(std::string("malformed calibration file: ") + e.what());
    }
    return stats;
}

} // namespace qnet::frontend
