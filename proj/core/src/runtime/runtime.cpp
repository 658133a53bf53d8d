// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/runtime/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>

#include "qnet/error.hpp"
#include "qnet/kernel/reference.hpp"
#include "qnet/kernel/stream_ops.hpp"

namespace qnet::runtime {

using kernel::Pipeline;
using kernel::StreamChannel;
using soc::OpType;

namespace {

constexpr int kSpillBurst = 512;

/// Stream-to-memory half of the off-chip residual round trip. Publishes the
/// number of elements written so the reader never overtakes it.
class SpillWriterStage : public kernel::Stage {
public:
    SpillWriterStage(std::string name, StreamChannel& in, std::size_t count, Pipeline& pipe,
                     std::shared_ptr<std::atomic<std::size_t>> written,
                     std::function<void(std::size_t, std::int32_t)> write)
        : Stage(std::move(name)), in_(in), count_(count), pipe_(pipe), written_(std::move(written)),
          write_(std::move(write)) {}

    bool step() override {
        bool progress = false;
        std::int32_t v;
        for (int i = 0; i < kSpillBurst && next_ < count_; ++i) {
            if (!kernel::pop_or_underrun(in_, v, *this))
                break;
            write_(next_++, v);
            progress = true;
        }
        if (progress) {
            written_->store(next_);
            pipe_.wake();
        }
        return progress;
    }
    bool done() const override { return next_ == count_; }

private:
    StreamChannel& in_;
    std::size_t count_;
    std::size_t next_ = 0;
    Pipeline& pipe_;
    std::shared_ptr<std::atomic<std::size_t>> written_;
    std::function<void(std::size_t, std::int32_t)> write_;
};

/// Memory-to-stream half: streams back elements the writer has stored.
class SpillReaderStage : public kernel::Stage {
public:
    SpillReaderStage(std::string name, StreamChannel& out, std::size_t count,
                     std::shared_ptr<std::atomic<std::size_t>> written, std::function<std::int32_t(std::size_t)> read)
        : Stage(std::move(name)), out_(out), count_(count), written_(std::move(written)), read_(std::move(read)) {}

    bool step() override {
        bool progress = out_.flush();
        const std::size_t avail = written_->load();
        for (int i = 0; i < kSpillBurst && out_.idle() && next_ < avail; ++i) {
            out_.emit(read_(next_++));
            progress |= out_.flush();
        }
        if (next_ == count_ && out_.idle() && !out_.channel().closed()) {
            out_.close();
            progress = true;
        }
        return progress;
    }
    bool done() const override {
        return next_ == count_ && out_.idle() && const_cast<kernel::OutputPort&>(out_).channel().closed();
    }

private:
    kernel::OutputPort out_;
    std::size_t count_;
    std::size_t next_ = 0;
    std::shared_ptr<std::atomic<std::size_t>> written_;
    std::function<std::int32_t(std::size_t)> read_;
};

bool is_signed_code(const frontend::QuantSpec& spec) { return spec.bounds().first < 0; }

/// Element counters of one invocation's DMA engines.
struct DmaCounters {
    std::atomic<std::uint64_t> input{0};
    std::atomic<std::uint64_t> output{0};
};

/// Element counters of one residual round trip through DDR.
struct SpillCounters {
    int bw = 0;
    std::atomic<std::uint64_t> written{0};
    std::atomic<std::uint64_t> read{0};
};

} // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty())
        return {};
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        sum += out[i] = std::exp(logits[i] - peak);
    for (auto& v : out)
        v /= sum;
    return out;
}

Runtime::Runtime(const frontend::QNetModel& model, soc::HardwarePlan plan, soc::Schedule schedule)
    : model_(model), plan_(std::move(plan)), schedule_(std::move(schedule)), image_(schedule_) {
    if (schedule_.invocations.size() != plan_.invocations.size())
        throw PlanError("schedule lists " + std::to_string(schedule_.invocations.size()) + " invocations, plan " +
                        std::to_string(plan_.invocations.size()));
    for (std::size_t i = 0; i < plan_.invocations.size(); ++i)
        if (!(schedule_.invocations[i].call == plan_.invocations[i]))
            throw PlanError("schedule invocation " + std::to_string(i) + " differs from the plan");
    soc::check_layout(schedule_);
    initialize_parameters(image_, model_, plan_, schedule_);
}

InferenceResult Runtime::infer(const ir::IntTensor& input, const InferenceOptions& options) {
    const std::vector<int> want{model_.input_channels, model_.input_resolution, model_.input_resolution};
    if (input.dims() != want)
        throw ShapeError("input " + ir::shape_string(input.dims()) + " does not match model input " +
                         ir::shape_string(want));
    if (schedule_.invocations.empty())
        throw PlanError("empty schedule");

    // Host side: feature regions start out unwritten, then the quantized
    // image goes into the input region in wire order.
    for (std::size_t r = 0; r < schedule_.regions.size(); ++r)
        if (!schedule_.regions[r].read_only())
            image_.invalidate(static_cast<int>(r));
    const auto& first = schedule_.invocations.front().call.layers.front();
    const auto wire = kernel::to_wire(input);
    for (std::size_t i = 0; i < wire.size(); ++i)
        image_.write_code(schedule_.input_region, i, first.in_bw, wire[i]);

    InferenceResult result;
    for (const auto& si : schedule_.invocations)
        run_invocation(si, options, result);

    // Host side: read the result back.
    const auto& last_inv = schedule_.invocations.back().call;
    const auto& last = last_inv.layers.back();
    const auto& last_layer = model_.blocks.at(last.block).layers.at(last.layer);
    const bool logits = last_layer.kind == ir::LayerKind::Dense;
    const bool out_signed = logits || is_signed_code(last_layer.out_spec);
    std::vector<std::int32_t> out_wire(last_inv.out.size());
    for (std::size_t i = 0; i < out_wire.size(); ++i)
        out_wire[i] = image_.read_code(schedule_.output_region, i, last.out_bw, out_signed);
    result.output = kernel::from_wire(out_wire, last_inv.out.c, last_inv.out.h, last_inv.out.w);
    if (logits) {
        const auto acc = result.output.data();
        result.logits.resize(acc.size());
        for (std::size_t m = 0; m < acc.size(); ++m)
            result.logits[m] = static_cast<double>(acc[m]) * last_layer.logit_scale.at(m);
        result.argmax = static_cast<int>(std::max_element(result.logits.begin(), result.logits.end()) - result.logits.begin());
        result.confidences = softmax(result.logits);
    }
    result.perf = estimate_performance(plan_, schedule_, options.frequency_hz);
    return result;
}

void Runtime::run_invocation(const soc::ScheduledInvocation& si, const InferenceOptions& options,
                             InferenceResult& result) {
    const auto& inv = si.call;
    const auto& cu = plan_.cu(inv.cu);
    const auto mode = model_.requant_mode;
    image_.invalidate(si.output_region);
    if (si.spill_region >= 0)
        image_.invalidate(si.spill_region);

    // Burst phase: parameters of every fused layer into on-chip buffers.
    const auto offsets = param_offsets(plan_, inv);
    std::vector<frontend::QLayer> layers;
    std::vector<OpType> types;
    std::uint64_t weight_bytes = 0, qparam_bytes = 0;
    for (std::size_t li = 0; li < inv.layers.size(); ++li) {
        const auto& p = inv.layers[li];
        const auto type = cu.slots.at(static_cast<std::size_t>(p.slot)).type;
        auto loaded = load_layer(image_, si, li, offsets[li], type, model_.blocks.at(p.block).layers.at(p.layer));
        weight_bytes += loaded.weight_bytes;
        qparam_bytes += loaded.qparam_bytes;
        layers.push_back(std::move(loaded.layer));
        types.push_back(type);
    }

    // Stream phase: one pipeline of the fused stages between two DMAs.
    Pipeline pipe;
    std::mutex mem_mu; // the image is shared by the DMA stages
    DmaCounters counters;
    const auto depth = [&](std::size_t row) { return options.fifo_depth ? options.fifo_depth : std::max<std::size_t>(row, 1); };
    const auto row_of = [](const ir::FeatureShape& s) { return static_cast<std::size_t>(s.w) * s.c; };
    const std::string tag = "inv" + std::to_string(inv.index) + ".";

    const auto& p0 = inv.layers.front();
    const int in_bw = p0.in_bw;
    const bool in_signed = is_signed_code(layers.front().in_spec);
    StreamChannel* cur = &pipe.channel(tag + "input", depth(row_of(inv.in)));
    pipe.add<kernel::SourceStage>(tag + "dma_in", *cur, inv.in.size(), [&, in_bw, in_signed](std::size_t i) {
        std::lock_guard lk(mem_mu);
        ++counters.input;
        return image_.read_code(si.input_region, i, in_bw, in_signed);
    });
    ir::FeatureShape shape = inv.in;

    StreamChannel* residual = nullptr;
    std::uint64_t spill_base = 0;
    std::vector<std::unique_ptr<SpillCounters>> spills;
    for (std::size_t li = 0; li < inv.layers.size(); ++li) {
        const auto& p = inv.layers[li];
        const auto& l = layers[li];
        const auto& block = model_.blocks.at(p.block);
        const std::string name = tag + p.name;

        // Block entry of a residual block: fork the block input.
        if (p.layer == 0 && block.residual) {
            const std::size_t total = shape.size();
            StreamChannel& main = pipe.channel(name + ".main", depth(row_of(shape)));
            if (cu.residual == soc::ResidualPlacement::OffChip && si.spill_region >= 0) {
                StreamChannel& out = pipe.channel(name + ".spill_out", depth(row_of(shape)));
                StreamChannel& back = pipe.channel(name + ".spill_in", depth(row_of(shape)));
                pipe.add<kernel::TeeStage>(name + ".fork", *cur, main, out, total);
                auto written = std::make_shared<std::atomic<std::size_t>>(0);
                const int bw = p.in_bw;
                const bool sgn = is_signed_code(l.in_spec);
                const std::uint64_t base = spill_base;
                auto& sc = *spills.emplace_back(std::make_unique<SpillCounters>());
                sc.bw = bw;
                pipe.add<SpillWriterStage>(name + ".spill_write", out, total, pipe, written,
                                           [&, bw, base](std::size_t i, std::int32_t v) {
                                               std::lock_guard lk(mem_mu);
                                               ++sc.written;
                                               image_.write_code(si.spill_region, i, bw, v, base);
                                           });
                pipe.add<SpillReaderStage>(name + ".spill_read", back, total, written, [&, bw, sgn, base](std::size_t i) {
                    std::lock_guard lk(mem_mu);
                    ++sc.read;
                    return image_.read_code(si.spill_region, i, bw, sgn, base);
                });
                spill_base += soc::packed_bytes(total, bw);
                residual = &back;
            } else {
                // On-chip residual buffer: holds the block input until the
                // main path catches up.
                StreamChannel& keep = pipe.channel(name + ".residual", std::max(total, depth(1)));
                pipe.add<kernel::TeeStage>(name + ".fork", *cur, main, keep, total);
                residual = &keep;
            }
            cur = &main;
        }

        const auto type = types[li];
        const ir::FeatureShape out_shape = p.out;
        if (type == OpType::AvgPool && block.kind == ir::BlockKind::InvertedResidual) {
            // Squeeze-excite: pool, squeeze, excite, scale.
            if (li + 3 >= inv.layers.size() || types[li + 1] != OpType::SeSqueeze ||
                types[li + 2] != OpType::SeExcite || types[li + 3] != OpType::SeScale)
                throw PlanError("squeeze-excite branch of '" + p.name + "' is not fused as a unit");
            const auto& squeeze = layers[li + 1];
            const auto& excite = layers[li + 2];
            const auto& scale = layers[li + 3];
            const int c = shape.c;
            const std::size_t total = shape.size();
            StreamChannel& main = pipe.channel(name + ".se_main", std::max(total, depth(1)));
            StreamChannel& side = pipe.channel(name + ".se_side", depth(row_of(shape)));
            StreamChannel& pooled = pipe.channel(name + ".se_pooled", depth(static_cast<std::size_t>(c)));
            StreamChannel& hidden = pipe.channel(name + ".se_hidden", depth(static_cast<std::size_t>(squeeze.m)));
            StreamChannel& gate = pipe.channel(name + ".se_gate", depth(static_cast<std::size_t>(c)));
            StreamChannel& out = pipe.channel(name + ".se_out", depth(row_of(shape)));
            const auto lanes = [&](std::size_t idx) {
                return cu.slots.at(static_cast<std::size_t>(inv.layers[idx].slot)).lanes;
            };
            pipe.add<kernel::TeeStage>(name + ".se_fork", *cur, main, side, total);
            pipe.add<kernel::AvgPoolStage>(name, side, pooled, c, shape.h * shape.w);
            pipe.add<kernel::PointwiseStage>(tag + squeeze.name, pooled, hidden, squeeze, 1, lanes(li + 1), mode);
            pipe.add<kernel::PointwiseStage>(tag + excite.name, hidden, gate, excite, 1, lanes(li + 2), mode);
            pipe.add<kernel::ScaleStage>(tag + scale.name, main, gate, out, scale, excite.out_spec.bounds().first,
                                         shape.h * shape.w, mode);
            cur = &out;
            li += 3;
            continue;
        }

        StreamChannel& out = pipe.channel(name + ".out", depth(row_of(out_shape)));
        switch (type) {
        case OpType::AvgPool:
            pipe.add<kernel::AvgPoolStage>(name, *cur, out, shape.c, shape.h * shape.w);
            break;
        case OpType::ResidualAdd:
            if (!residual)
                throw PlanError("residual add '" + p.name + "' without a forked block input");
            pipe.add<kernel::ResidualAddStage>(name, *cur, *residual, out, l, shape.size(), mode);
            residual = nullptr;
            break;
        case OpType::SeSqueeze:
        case OpType::SeExcite:
        case OpType::SeScale:
            throw PlanError("squeeze-excite layer '" + p.name + "' outside its branch");
        default: {
            const int lanes = cu.slots.at(static_cast<std::size_t>(p.slot)).lanes;
            if (l.kind == ir::LayerKind::Dense || (l.k == 1 && l.groups == 1 && l.stride == 1)) {
                pipe.add<kernel::PointwiseStage>(name, *cur, out, l, shape.h * shape.w, lanes, mode);
            } else {
                const int pad = kernel::same_pad(l.k);
                StreamChannel& padded =
                    pipe.channel(name + ".padded", depth(static_cast<std::size_t>(shape.w + 2 * pad) * shape.c));
                pipe.add<kernel::PadStage>(name + ".pad", *cur, padded, shape.c, shape.h, shape.w, pad,
                                           l.in_spec.zero_at(0));
                pipe.add<kernel::WindowConvStage>(name, padded, out, l, shape.h, shape.w, mode);
            }
        }
        }
        cur = &out;
        shape = out_shape;
    }
    if (residual)
        throw PlanError("invocation " + std::to_string(inv.index) + " leaves a residual branch unconsumed");

    const auto& pl = inv.layers.back();
    const int out_bw = pl.out_bw;
    pipe.add<kernel::SinkStage>(tag + "dma_out", *cur, inv.out.size(), [&, out_bw](std::size_t i, std::int32_t v) {
        std::lock_guard lk(mem_mu);
        ++counters.output;
        image_.write_code(si.output_region, i, out_bw, v);
    });
    pipe.set_trace(options.stream_trace);
    pipe.run(options.driver);

    // Measured transfers, in the order the analytic trace lists them.
    auto& t = result.trace.transactions;
    const auto push = [&](TransferKind kind, Direction dir, TensorRole role, std::uint64_t bytes) {
        if (bytes > 0)
            t.push_back({inv.index, kind, dir, role, bytes});
    };
    std::uint64_t spill_w = 0, spill_r = 0;
    for (const auto& sc : spills) {
        spill_w += soc::packed_bytes(sc->written, sc->bw);
        spill_r += soc::packed_bytes(sc->read, sc->bw);
    }
    push(TransferKind::Burst, Direction::Read, TensorRole::Weights, weight_bytes);
    push(TransferKind::Burst, Direction::Read, TensorRole::QuantParams, qparam_bytes);
    push(TransferKind::Stream, Direction::Read, TensorRole::Input, soc::packed_bytes(counters.input, in_bw));
    push(TransferKind::Stream, Direction::Write, TensorRole::ResidualSpill, spill_w);
    push(TransferKind::Stream, Direction::Read, TensorRole::ResidualSpill, spill_r);
    push(TransferKind::Stream, Direction::Write, TensorRole::Output, soc::packed_bytes(counters.output, out_bw));

    InvocationStats stats;
    stats.invocation = inv.index;
    stats.channels = pipe.channel_stats();
    stats.macs = pipe.total_macs();
    result.invocations.push_back(std::move(stats));
}

} // namespace qnet::runtime
