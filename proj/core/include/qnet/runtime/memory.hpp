// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qnet/frontend/qnet.hpp"
#include "qnet/soc/plan.hpp"
#include "qnet/soc/schedule.hpp"

namespace qnet::runtime {

/// Flat byte array standing in for the DDR shared by host and accelerator.
/// Every access names a region of the schedule's layout and is bounds
/// checked against it; reads of bytes never written since the region's
/// tensor came alive throw MemoryError, as do writes to parameter regions
/// once sealed.
class SharedMemoryImage {
public:
    explicit SharedMemoryImage(const soc::Schedule& schedule);

    std::uint64_t size() const { return bytes_.size(); }
    const soc::Region& region(int index) const;

    void write(int region, std::uint64_t offset, std::span<const std::uint8_t> data);
    void read(int region, std::uint64_t offset, std::span<std::uint8_t> out) const;

    /// Packed codes: element i occupies bits [i*bw, (i+1)*bw) counted from
    /// byte `base` of the region, least significant bit first. Signed codes
    /// are two's complement in bw bits.
    void write_code(int region, std::uint64_t index, int bw, std::int32_t value, std::uint64_t base = 0);
    std::int32_t read_code(int region, std::uint64_t index, int bw, bool is_signed, std::uint64_t base = 0) const;

    /// Forgets the contents of a region (its bytes count as unwritten).
    void invalidate(int region);
    /// Makes weight and quantization-parameter regions read-only.
    void seal_parameters() { sealed_ = true; }
    bool sealed() const { return sealed_; }

    /// Raw view for tests and dumps.
    std::span<const std::uint8_t> bytes() const { return bytes_; }

private:
    void check_range(int region, std::uint64_t offset, std::uint64_t len) const;
    void check_writable(int region) const;
    void check_written(int region, std::uint64_t abs, std::uint64_t len) const;

    std::vector<soc::Region> regions_;
    std::vector<std::uint8_t> bytes_;
    std::vector<std::uint8_t> written_;
    bool sealed_ = false;
};

/// Byte offsets of each layer's weights and quantization parameters inside
/// the invocation's weight and parameter regions (layer order).
struct LayerParamOffsets {
    std::uint64_t weights = 0;
    std::uint64_t qparams = 0;
};
std::vector<LayerParamOffsets> param_offsets(const soc::HardwarePlan& plan, const soc::Invocation& inv);

/// Host-side initialization: writes every layer's packed weights and
/// quantization records into the image, then seals the parameter regions.
/// Throws PlanError when the plan does not describe `model`.
void initialize_parameters(SharedMemoryImage& image, const frontend::QNetModel& model, const soc::HardwarePlan& plan,
                           const soc::Schedule& schedule);

/// Byte counts of one layer read back from the image.
struct LoadedLayer {
    frontend::QLayer layer;
    std::uint64_t weight_bytes = 0;
    std::uint64_t qparam_bytes = 0;
};

/// Burst-reads a layer's parameters from the image into a copy of
/// `reference`: weights, bias and requantization tables come from memory;
/// zero points and clamp bounds are checked against the reference.
LoadedLayer load_layer(const SharedMemoryImage& image, const soc::ScheduledInvocation& si, std::size_t layer_index,
                       const LayerParamOffsets& offsets, soc::OpType type, const frontend::QLayer& reference);

/// Checks that the plan's invocations walk the model's layers in order with
/// matching operator shapes; throws PlanError otherwise.
void check_plan_matches(const frontend::QNetModel& model, const soc::HardwarePlan& plan);

} // namespace qnet::runtime
