// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/kernel/stream_ops.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "qnet/kernel/reference.hpp"

namespace qnet::kernel {

namespace {

// Elements moved per step() before yielding to the driver.
constexpr int kBurst = 512;

std::int32_t checked_acc(std::int64_t acc, const std::string& stage) {
    if (acc > std::numeric_limits<std::int32_t>::max() || acc < std::numeric_limits<std::int32_t>::min())
        throw StreamError("accumulator overflow in '" + stage + "'");
    return static_cast<std::int32_t>(acc);
}

std::int32_t weight_zero(const QLayer& l, int m) { return l.weight_spec.zero_at(static_cast<std::size_t>(m)); }

} // namespace

SourceStage::SourceStage(std::string name, StreamChannel& out, std::size_t count,
                         std::function<std::int32_t(std::size_t)> read)
    : Stage(std::move(name)), out_(out), count_(count), read_(std::move(read)) {}

bool SourceStage::step() {
    bool progress = out_.flush();
    for (int i = 0; i < kBurst && out_.idle() && next_ < count_; ++i) {
        out_.emit(read_(next_++));
        progress |= out_.flush();
    }
    if (next_ == count_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool SourceStage::done() const { return next_ == count_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed(); }

SinkStage::SinkStage(std::string name, StreamChannel& in, std::size_t count,
                     std::function<void(std::size_t, std::int32_t)> write)
    : Stage(std::move(name)), in_(in), count_(count), write_(std::move(write)) {}

bool SinkStage::step() {
    bool progress = false;
    std::int32_t v;
    for (int i = 0; i < kBurst && next_ < count_; ++i) {
        if (!pop_or_underrun(in_, v, *this))
            break;
        write_(next_++, v);
        progress = true;
    }
    return progress;
}

TeeStage::TeeStage(std::string name, StreamChannel& in, StreamChannel& a, StreamChannel& b, std::size_t count)
    : Stage(std::move(name)), in_(in), a_(a), b_(b), count_(count) {}

bool TeeStage::step() {
    bool progress = a_.flush();
    progress |= b_.flush();
    std::int32_t v;
    for (int i = 0; i < kBurst && a_.idle() && b_.idle() && next_ < count_; ++i) {
        if (!pop_or_underrun(in_, v, *this))
            break;
        ++next_;
        a_.emit(v);
        b_.emit(v);
        a_.flush();
        b_.flush();
        progress = true;
    }
    if (next_ == count_ && a_.idle() && b_.idle() && !a_.channel().closed()) {
        a_.close();
        b_.close();
        progress = true;
    }
    return progress;
}

bool TeeStage::done() const {
    return next_ == count_ && a_.idle() && b_.idle() && const_cast<OutputPort&>(a_).channel().closed();
}

PadStage::PadStage(std::string name, StreamChannel& in, StreamChannel& out, int channels, int height, int width,
                   int pad, std::int32_t value)
    : Stage(std::move(name)), in_(in), out_(out), c_(channels), h_(height), w_(width), pad_(pad), value_(value),
      total_(static_cast<std::size_t>(channels) * (height + 2 * pad) * (width + 2 * pad)) {}

bool PadStage::step() {
    bool progress = out_.flush();
    const std::size_t wp = static_cast<std::size_t>(w_ + 2 * pad_);
    std::int32_t v;
    for (int i = 0; i < kBurst && out_.idle() && next_ < total_; ++i) {
        const std::size_t pixel = next_ / c_;
        const int py = static_cast<int>(pixel / wp) - pad_;
        const int px = static_cast<int>(pixel % wp) - pad_;
        if (py >= 0 && py < h_ && px >= 0 && px < w_) {
            if (!pop_or_underrun(in_, v, *this))
                break;
        } else {
            v = value_;
        }
        ++next_;
        out_.emit(v);
        out_.flush();
        progress = true;
    }
    if (next_ == total_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool PadStage::done() const { return next_ == total_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed(); }

WindowConvStage::WindowConvStage(std::string name, StreamChannel& in, StreamChannel& out, const QLayer& layer,
                                 int in_height, int in_width, RequantMode mode)
    : Stage(std::move(name)), in_(in), out_(out), layer_(layer), mode_(mode), n_(layer.n), m_(layer.m),
      k_(layer.k), stride_(layer.stride), groups_(layer.groups) {
    if (!layer.is_conv() || k_ % 2 == 0)
        throw ShapeError("window convolution needs an odd-kernel convolution, got '" + layer.name + "'");
    if (static_cast<int>(layer.requant.size()) != m_)
        throw ShapeError("layer '" + layer.name + "' lacks a requantization table");
    const int pad = same_pad(k_);
    hp_ = in_height + 2 * pad;
    wp_ = in_width + 2 * pad;
    ho_ = ir::conv_output_size(in_height, stride_);
    wo_ = ir::conv_output_size(in_width, stride_);
    x_zero_ = layer.in_spec.zero_at(0);
    bounds_ = layer.out_spec.bounds();
    ring_.assign(static_cast<std::size_t>(k_) * wp_ * n_, x_zero_);
    window_.assign(static_cast<std::size_t>(k_) * k_ * n_, x_zero_);
}

bool WindowConvStage::step() {
    bool progress = out_.flush();
    const std::size_t total = static_cast<std::size_t>(hp_) * wp_;
    std::int32_t v;
    for (int i = 0; i < kBurst && out_.idle() && pixels_in_ < total; ++i) {
        if (!pop_or_underrun(in_, v, *this))
            break;
        progress = true;
        ring_[((static_cast<std::size_t>(y_ % k_) * wp_) + x_) * n_ + c_] = v;
        if (++c_ == n_) {
            c_ = 0;
            accept_pixel();
            out_.flush();
        }
    }
    if (pixels_in_ == total && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool WindowConvStage::done() const {
    return pixels_in_ == static_cast<std::size_t>(hp_) * wp_ && out_.idle() &&
           const_cast<OutputPort&>(out_).channel().closed();
}

void WindowConvStage::accept_pixel() {
    // Shift the window one column left, then reload its right column from
    // the line buffer (rows y-K+1 .. y at column x).
    const std::size_t col = static_cast<std::size_t>(n_);
    for (int ky = 0; ky < k_; ++ky) {
        std::int32_t* row = window_.data() + static_cast<std::size_t>(ky) * k_ * col;
        std::copy(row + col, row + k_ * col, row);
        const int src_row = ((y_ - k_ + 1 + ky) % k_ + k_) % k_;
        const std::int32_t* src = ring_.data() + (static_cast<std::size_t>(src_row) * wp_ + x_) * col;
        std::copy(src, src + col, row + (k_ - 1) * col);
    }
    ++pixels_in_;
    const int top = y_ - k_ + 1;
    const int left = x_ - k_ + 1;
    if (top >= 0 && left >= 0 && top % stride_ == 0 && left % stride_ == 0 && top / stride_ < ho_ &&
        left / stride_ < wo_) {
        if (!first_output_after_)
            first_output_after_ = pixels_in_;
        compute(top / stride_, left / stride_);
    }
    if (++x_ == wp_) {
        x_ = 0;
        ++y_;
    }
}

void WindowConvStage::compute(int oy, int ox) {
    if (observer_)
        observer_(oy, ox, window_);
    const int cpg = n_ / groups_;
    const int m_per_group = m_ / groups_;
    const auto w = layer_.weights.data();
    const std::int32_t zero_out = layer_.out_spec.zero_at(0);
    for (int m = 0; m < m_; ++m) {
        const int g = m / m_per_group;
        const std::int64_t wz = weight_zero(layer_, m);
        std::int64_t acc = layer_.bias.empty() ? 0 : layer_.bias[m];
        for (int ky = 0; ky < k_; ++ky)
            for (int kx = 0; kx < k_; ++kx) {
                const std::int32_t* win = window_.data() + (static_cast<std::size_t>(ky) * k_ + kx) * n_ + g * cpg;
                for (int c = 0; c < cpg; ++c) {
                    const std::size_t wi = ((static_cast<std::size_t>(m) * cpg + c) * k_ + ky) * k_ + kx;
                    acc += static_cast<std::int64_t>(win[c] - x_zero_) * (w[wi] - wz);
                }
            }
        macs_ += static_cast<std::uint64_t>(k_) * k_ * cpg;
        checked_acc(acc, name());
        out_.emit(approximate_and_clip(acc, layer_.requant[m], zero_out, bounds_.first, bounds_.second, mode_));
    }
    ++outputs_;
}

PointwiseStage::PointwiseStage(std::string name, StreamChannel& in, StreamChannel& out, const QLayer& layer,
                               int pixels, int lanes, RequantMode mode)
    : Stage(std::move(name)), in_(in), out_(out), layer_(layer), mode_(mode), lanes_(lanes > 0 ? lanes : layer.n),
      pixels_(static_cast<std::size_t>(pixels)), scratch_(static_cast<std::size_t>(layer.n)) {
    if (layer.k != 1 || layer.groups != 1 || !layer.is_weighted())
        throw ShapeError("pointwise stage needs a 1x1 convolution or dense layer, got '" + layer.name + "'");
    if (layer.kind != ir::LayerKind::Dense) {
        if (static_cast<int>(layer.requant.size()) != layer.m)
            throw ShapeError("layer '" + layer.name + "' lacks a requantization table");
        bounds_ = layer.out_spec.bounds();
    }
}

bool PointwiseStage::step() {
    bool progress = out_.flush();
    std::int32_t v;
    for (int i = 0; i < kBurst && out_.idle() && pixel_ < pixels_; ++i) {
        if (!pop_or_underrun(in_, v, *this))
            break;
        progress = true;
        scratch_[filled_++] = v;
        if (filled_ == scratch_.size()) {
            compute();
            filled_ = 0;
            ++pixel_;
            out_.flush();
        }
    }
    if (pixel_ == pixels_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool PointwiseStage::done() const {
    return pixel_ == pixels_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed();
}

void PointwiseStage::compute() {
    const int n = layer_.n;
    const std::int32_t xz = layer_.in_spec.zero_at(0);
    const auto w = layer_.weights.data();
    const bool dense = layer_.kind == ir::LayerKind::Dense;
    const std::int32_t zero_out = dense ? 0 : layer_.out_spec.zero_at(0);
    for (int m = 0; m < layer_.m; ++m) {
        const std::int64_t wz = weight_zero(layer_, m);
        std::int64_t acc = layer_.bias.empty() ? 0 : layer_.bias[m];
        const std::int32_t* wrow = w.data() + static_cast<std::size_t>(m) * n;
        for (int c0 = 0; c0 < n; c0 += lanes_) {
            const int width = std::min(lanes_, n - c0);
            for (int lane = 0; lane < width; ++lane)
                acc += static_cast<std::int64_t>(scratch_[c0 + lane] - xz) * (wrow[c0 + lane] - wz);
            ++passes_;
        }
        macs_ += static_cast<std::uint64_t>(n);
        const std::int32_t a = checked_acc(acc, name());
        out_.emit(dense ? a
                        : approximate_and_clip(acc, layer_.requant[m], zero_out, bounds_.first, bounds_.second,
                                               mode_));
    }
}

AvgPoolStage::AvgPoolStage(std::string name, StreamChannel& in, StreamChannel& out, int channels, int pixels)
    : Stage(std::move(name)), in_(in), out_(out), c_(channels), pixels_(static_cast<std::size_t>(pixels)),
      sums_(static_cast<std::size_t>(channels), 0) {}

bool AvgPoolStage::step() {
    bool progress = out_.flush();
    const std::size_t total = pixels_ * c_;
    std::int32_t v;
    for (int i = 0; i < kBurst && consumed_ < total; ++i) {
        if (!pop_or_underrun(in_, v, *this))
            break;
        sums_[consumed_ % c_] += v;
        ++consumed_;
        progress = true;
    }
    if (consumed_ == total && !emitted_) {
        for (int c = 0; c < c_; ++c)
            out_.emit(static_cast<std::int32_t>(
                frontend::div_round_half_away(sums_[c], static_cast<std::int64_t>(pixels_))));
        emitted_ = true;
        progress |= out_.flush();
    }
    if (emitted_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool AvgPoolStage::done() const { return emitted_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed(); }

ScaleStage::ScaleStage(std::string name, StreamChannel& main, StreamChannel& gate, StreamChannel& out,
                       const QLayer& layer, std::int32_t gate_offset, int pixels, RequantMode mode)
    : Stage(std::move(name)), main_(main), gate_in_(gate), out_(out), layer_(layer), gate_offset_(gate_offset),
      mode_(mode), total_(static_cast<std::size_t>(pixels) * layer.n) {
    gate_.reserve(static_cast<std::size_t>(layer.n));
}

bool ScaleStage::step() {
    bool progress = out_.flush();
    std::int32_t v;
    while (gate_.size() < static_cast<std::size_t>(layer_.n)) {
        if (!pop_or_underrun(gate_in_, v, *this))
            return progress;
        gate_.push_back(v - gate_offset_);
        progress = true;
    }
    const std::int32_t zero = layer_.in_spec.zero_at(0);
    const std::int32_t zero_out = layer_.out_spec.zero_at(0);
    const auto [lo, hi] = layer_.out_spec.bounds();
    for (int i = 0; i < kBurst && out_.idle() && next_ < total_; ++i) {
        if (!pop_or_underrun(main_, v, *this))
            break;
        const std::int64_t prod = static_cast<std::int64_t>(v - zero) * gate_[next_ % gate_.size()];
        out_.emit(approximate_and_clip(prod, layer_.requant.at(0), zero_out, lo, hi, mode_));
        ++next_;
        macs_ += 1;
        out_.flush();
        progress = true;
    }
    if (next_ == total_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool ScaleStage::done() const { return next_ == total_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed(); }

ResidualAddStage::ResidualAddStage(std::string name, StreamChannel& a, StreamChannel& b, StreamChannel& out,
                                   const QLayer& layer, std::size_t count, RequantMode mode)
    : Stage(std::move(name)), a_(a), b_(b), out_(out), layer_(layer), mode_(mode), count_(count) {}

bool ResidualAddStage::step() {
    bool progress = out_.flush();
    const std::int32_t za = layer_.in_spec.zero_at(0);
    const std::int32_t zb = layer_.aux_spec.zero_at(0);
    const std::int32_t zo = layer_.out_spec.zero_at(0);
    const auto [lo, hi] = layer_.out_spec.bounds();
    for (int i = 0; i < kBurst && out_.idle() && next_ < count_; ++i) {
        if (!held_a_) {
            std::int32_t v;
            if (!pop_or_underrun(a_, v, *this))
                break;
            held_a_ = v;
            progress = true;
        }
        std::int32_t b;
        if (!pop_or_underrun(b_, b, *this))
            break;
        const std::int64_t q = layer_.pair.apply(*held_a_ - za, b - zb, mode_) + zo;
        out_.emit(static_cast<std::int32_t>(std::clamp<std::int64_t>(q, lo, hi)));
        held_a_.reset();
        ++next_;
        out_.flush();
        progress = true;
    }
    if (next_ == count_ && out_.idle() && !out_.channel().closed()) {
        out_.close();
        progress = true;
    }
    return progress;
}

bool ResidualAddStage::done() const {
    return next_ == count_ && out_.idle() && const_cast<OutputPort&>(out_).channel().closed();
}

std::vector<std::int32_t> to_wire(const ir::IntTensor& t) {
    const int c = t.channels(), h = t.height(), w = t.width();
    std::vector<std::int32_t> out(t.size());
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[wire_index(ch, y, x, c, w)] = t.at(ch, y, x);
    return out;
}

ir::IntTensor from_wire(std::span<const std::int32_t> wire, int channels, int height, int width) {
    ir::IntTensor t({channels, height, width});
    if (wire.size() != t.size())
        throw ShapeError("wire stream length does not match tensor shape");
    for (int ch = 0; ch < channels; ++ch)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                t.at(ch, y, x) = wire[wire_index(ch, y, x, channels, width)];
    return t;
}

namespace {

std::size_t depth(const StreamOptions& opts, std::size_t row) {
    return opts.fifo_depth ? opts.fifo_depth : std::max<std::size_t>(row, 1);
}

struct Harness {
    Pipeline p;
    std::vector<std::int32_t> in_wire;
    std::vector<std::int32_t> out_wire;

    StreamChannel& source(const std::string& name, const ir::IntTensor& t, std::size_t cap) {
        auto wire = std::make_shared<std::vector<std::int32_t>>(to_wire(t));
        StreamChannel& ch = p.channel(name, cap);
        p.add<SourceStage>(name + ".dma", ch, wire->size(), [wire](std::size_t i) { return (*wire)[i]; });
        return ch;
    }

    void sink(StreamChannel& ch, std::size_t count) {
        out_wire.assign(count, 0);
        p.add<SinkStage>("sink", ch, count, [this](std::size_t i, std::int32_t v) { out_wire[i] = v; });
    }

    StreamRun finish(const StreamOptions& opts, int c, int h, int w) {
        p.set_trace(opts.trace);
        p.run(opts.driver);
        StreamRun r;
        r.output = from_wire(out_wire, c, h, w);
        r.channels = p.channel_stats();
        r.macs = p.total_macs();
        return r;
    }
};

void check_input(const QLayer& layer, const ir::IntTensor& input) {
    if (input.rank() != 3 || input.channels() != layer.n)
        throw ShapeError("layer '" + layer.name + "' expects " + std::to_string(layer.n) + " input channels, got " +
                         ir::shape_string(input.dims()));
}

} // namespace

StreamRun stream_conv(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts) {
    check_input(layer, input);
    if (layer.k == 1 && layer.groups == 1 && layer.stride == 1)
        return stream_conv_pw(layer, input, opts);
    const int h = input.height(), w = input.width();
    const int pad = same_pad(layer.k);
    const int ho = ir::conv_output_size(h, layer.stride), wo = ir::conv_output_size(w, layer.stride);
    Harness hs;
    StreamChannel& in = hs.source("input", input, depth(opts, static_cast<std::size_t>(w) * layer.n));
    StreamChannel& padded = hs.p.channel("padded", depth(opts, static_cast<std::size_t>(w + 2 * pad) * layer.n));
    StreamChannel& out = hs.p.channel("output", depth(opts, static_cast<std::size_t>(wo) * layer.m));
    hs.p.add<PadStage>("pad", in, padded, layer.n, h, w, pad, layer.in_spec.zero_at(0));
    auto& conv = hs.p.add<WindowConvStage>(layer.name, padded, out, layer, h, w, opts.mode);
    if (opts.window_observer)
        conv.set_window_observer(opts.window_observer);
    hs.sink(out, static_cast<std::size_t>(ho) * wo * layer.m);
    StreamRun r = hs.finish(opts, layer.m, ho, wo);
    r.first_output_after = conv.first_output_after();
    return r;
}

StreamRun stream_conv_dw(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts) {
    if (layer.kind != ir::LayerKind::DepthwiseConv)
        throw ShapeError("layer '" + layer.name + "' is not a depthwise convolution");
    return stream_conv(layer, input, opts);
}

StreamRun stream_conv_normal(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts) {
    if (layer.kind != ir::LayerKind::NormalConv)
        throw ShapeError("layer '" + layer.name + "' is not a normal convolution");
    return stream_conv(layer, input, opts);
}

StreamRun stream_conv_pw(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts) {
    check_input(layer, input);
    if (layer.k != 1 || layer.groups != 1 || layer.stride != 1)
        throw ShapeError("layer '" + layer.name + "' is not a stride-1 pointwise layer");
    const int h = input.height(), w = input.width();
    Harness hs;
    StreamChannel& in = hs.source("input", input, depth(opts, static_cast<std::size_t>(w) * layer.n));
    StreamChannel& out = hs.p.channel("output", depth(opts, static_cast<std::size_t>(w) * layer.m));
    auto& pw = hs.p.add<PointwiseStage>(layer.name, in, out, layer, h * w, opts.lanes, opts.mode);
    hs.sink(out, static_cast<std::size_t>(h) * w * layer.m);
    StreamRun r = hs.finish(opts, layer.m, h, w);
    r.passes = pw.passes();
    return r;
}

StreamRun avg_pool_stream(const ir::IntTensor& input, const StreamOptions& opts) {
    const int c = input.channels(), h = input.height(), w = input.width();
    Harness hs;
    StreamChannel& in = hs.source("input", input, depth(opts, static_cast<std::size_t>(w) * c));
    StreamChannel& out = hs.p.channel("output", depth(opts, static_cast<std::size_t>(c)));
    hs.p.add<AvgPoolStage>("pool", in, out, c, h * w);
    hs.sink(out, static_cast<std::size_t>(c));
    return hs.finish(opts, c, 1, 1);
}

StreamRun squeeze_excite_stream(const ir::IntTensor& input, const QLayer& squeeze, const QLayer& excite,
                                const QLayer& scale, const StreamOptions& opts) {
    const int c = input.channels(), h = input.height(), w = input.width();
    if (squeeze.n != c || excite.m != c || scale.n != c)
        throw ShapeError("squeeze-excite layers do not match " + std::to_string(c) + " channels");
    const std::size_t total = static_cast<std::size_t>(c) * h * w;
    Harness hs;
    StreamChannel& in = hs.source("input", input, depth(opts, static_cast<std::size_t>(w) * c));
    // The main branch must hold the whole tensor until the gate is known.
    StreamChannel& main = hs.p.channel("se_main", std::max(total, depth(opts, 1)));
    StreamChannel& side = hs.p.channel("se_side", depth(opts, static_cast<std::size_t>(w) * c));
    StreamChannel& pooled = hs.p.channel("se_pooled", depth(opts, static_cast<std::size_t>(c)));
    StreamChannel& hidden = hs.p.channel("se_hidden", depth(opts, static_cast<std::size_t>(squeeze.m)));
    StreamChannel& gate = hs.p.channel("se_gate", depth(opts, static_cast<std::size_t>(c)));
    StreamChannel& out = hs.p.channel("output", depth(opts, static_cast<std::size_t>(w) * c));
    hs.p.add<TeeStage>("se_tee", in, main, side, total);
    hs.p.add<AvgPoolStage>("se_pool", side, pooled, c, h * w);
    hs.p.add<PointwiseStage>(squeeze.name, pooled, hidden, squeeze, 1, opts.lanes, opts.mode);
    hs.p.add<PointwiseStage>(excite.name, hidden, gate, excite, 1, opts.lanes, opts.mode);
    hs.p.add<ScaleStage>(scale.name, main, gate, out, scale, excite.out_spec.bounds().first, h * w, opts.mode);
    hs.sink(out, total);
    return hs.finish(opts, c, h, w);
}

StreamRun residual_add_stream(const ir::IntTensor& a, const ir::IntTensor& b, const QLayer& add,
                              const StreamOptions& opts) {
    if (a.dims() != b.dims())
        throw ShapeError("residual add of " + ir::shape_string(a.dims()) + " and " + ir::shape_string(b.dims()));
    const int c = a.channels(), h = a.height(), w = a.width();
    Harness hs;
    const std::size_t row = static_cast<std::size_t>(w) * c;
    StreamChannel& ina = hs.source("input_a", a, depth(opts, row));
    StreamChannel& inb = hs.source("input_b", b, depth(opts, row));
    StreamChannel& out = hs.p.channel("output", depth(opts, row));
    hs.p.add<ResidualAddStage>(add.name, ina, inb, out, add, a.size(), opts.mode);
    hs.sink(out, a.size());
    return hs.finish(opts, c, h, w);
}

} // namespace qnet::kernel
