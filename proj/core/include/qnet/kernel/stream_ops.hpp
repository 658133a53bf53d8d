// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qnet/frontend/qnet.hpp"
#include "qnet/kernel/stream.hpp"

// Streaming datapath stages. Every feature-map stream uses the same wire
// format: pixels in raster order (row by row, left to right) and, at each
// pixel, all channels in increasing order. A CHW tensor (C, H, W) therefore
// travels as element index (y * W + x) * C + c.

namespace qnet::kernel {

using frontend::QLayer;
using frontend::RequantMode;

/// Reads `count` elements through `read(i)` and streams them out. Models a
/// memory-to-stream DMA.
class SourceStage : public Stage {
public:
    SourceStage(std::string name, StreamChannel& out, std::size_t count,
                std::function<std::int32_t(std::size_t)> read);
    bool step() override;
    bool done() const override;

private:
    OutputPort out_;
    std::size_t count_;
    std::size_t next_ = 0;
    std::function<std::int32_t(std::size_t)> read_;
};

/// Drains `count` elements into `write(i, v)`. Models stream-to-memory DMA.
class SinkStage : public Stage {
public:
    SinkStage(std::string name, StreamChannel& in, std::size_t count,
              std::function<void(std::size_t, std::int32_t)> write);
    bool step() override;
    bool done() const override { return next_ == count_; }

private:
    StreamChannel& in_;
    std::size_t count_;
    std::size_t next_ = 0;
    std::function<void(std::size_t, std::int32_t)> write_;
};

/// Duplicates a stream onto two outputs.
class TeeStage : public Stage {
public:
    TeeStage(std::string name, StreamChannel& in, StreamChannel& a, StreamChannel& b, std::size_t count);
    bool step() override;
    bool done() const override;

private:
    StreamChannel& in_;
    OutputPort a_;
    OutputPort b_;
    std::size_t count_;
    std::size_t next_ = 0;
};

/// Surrounds an (H, W, C) stream with `pad` rows/columns of `value` on every
/// side, yielding (H + 2 pad, W + 2 pad, C).
class PadStage : public Stage {
public:
    PadStage(std::string name, StreamChannel& in, StreamChannel& out, int channels, int height, int width, int pad,
             std::int32_t value);
    bool step() override;
    bool done() const override;

private:
    StreamChannel& in_;
    OutputPort out_;
    int c_, h_, w_, pad_;
    std::int32_t value_;
    std::size_t total_;
    std::size_t next_ = 0;
};

/// Observer receiving each complete window as [ky][kx][c] (K * K * N values)
/// together with the output coordinate it produces.
using WindowObserver = std::function<void(int oy, int ox, std::span<const std::int32_t> window)>;

/// Line-buffer convolution for normal, group and depthwise layers. Consumes
/// the padded input stream; a ring of K rows holds the most recent input
/// rows and a K x K x N register window slides along each row: on every
/// arriving pixel the window shifts left and its right column is reloaded
/// from the line buffer. Output pixels stream out as soon as their window
/// is complete, M channels per pixel.
class WindowConvStage : public Stage {
public:
    WindowConvStage(std::string name, StreamChannel& in, StreamChannel& out, const QLayer& layer, int in_height,
                    int in_width, RequantMode mode);
    bool step() override;
    bool done() const override;

    void set_window_observer(WindowObserver obs) { observer_ = std::move(obs); }
    /// Padded input pixels consumed when the first output was produced.
    std::optional<std::size_t> first_output_after() const { return first_output_after_; }
    std::size_t line_buffer_elements() const { return ring_.size(); }

private:
    void accept_pixel();
    void compute(int oy, int ox);

    StreamChannel& in_;
    OutputPort out_;
    const QLayer& layer_;
    RequantMode mode_;
    int n_, m_, k_, stride_, groups_;
    int hp_, wp_, ho_, wo_;
    std::int32_t x_zero_;
    std::pair<std::int32_t, std::int32_t> bounds_;
    std::vector<std::int32_t> ring_;   // [K][Wp][N]
    std::vector<std::int32_t> window_; // [K][K][N]
    int y_ = 0, x_ = 0, c_ = 0;
    std::size_t pixels_in_ = 0;
    std::size_t outputs_ = 0;
    std::optional<std::size_t> first_output_after_;
    WindowObserver observer_;
};

/// Pointwise (1x1) convolution or dense layer. The N input values of a
/// pixel are gathered in a scratchpad, then each output channel reduces them
/// over `lanes` parallel multipliers; when N is not a multiple of lanes a
/// final partial pass covers the remainder. Dense layers emit raw int32
/// accumulators.
class PointwiseStage : public Stage {
public:
    PointwiseStage(std::string name, StreamChannel& in, StreamChannel& out, const QLayer& layer, int pixels,
                   int lanes, RequantMode mode);
    bool step() override;
    bool done() const override;

    /// Multiplier passes issued (ceil(N / lanes) per output element).
    std::uint64_t passes() const { return passes_; }

private:
    void compute();

    StreamChannel& in_;
    OutputPort out_;
    const QLayer& layer_;
    RequantMode mode_;
    int lanes_;
    std::size_t pixels_;
    std::vector<std::int32_t> scratch_;
    std::size_t filled_ = 0;
    std::size_t pixel_ = 0;
    std::uint64_t passes_ = 0;
    std::pair<std::int32_t, std::int32_t> bounds_;
};

/// Global average pooling: accumulates per-channel sums on the fly and
/// emits the C rounded means after the last pixel.
class AvgPoolStage : public Stage {
public:
    AvgPoolStage(std::string name, StreamChannel& in, StreamChannel& out, int channels, int pixels);
    bool step() override;
    bool done() const override;

private:
    StreamChannel& in_;
    OutputPort out_;
    int c_;
    std::size_t pixels_;
    std::vector<std::int64_t> sums_;
    std::size_t consumed_ = 0;
    bool emitted_ = false;
};

/// Squeeze-excite scaling: reads the C gate codes, then rescales every
/// element of the main stream by its channel's gate.
class ScaleStage : public Stage {
public:
    ScaleStage(std::string name, StreamChannel& main, StreamChannel& gate, StreamChannel& out, const QLayer& layer,
               std::int32_t gate_offset, int pixels, RequantMode mode);
    bool step() override;
    bool done() const override;

private:
    StreamChannel& main_;
    StreamChannel& gate_in_;
    OutputPort out_;
    const QLayer& layer_;
    std::int32_t gate_offset_;
    RequantMode mode_;
    std::vector<std::int32_t> gate_;
    std::size_t total_;
    std::size_t next_ = 0;
};

/// Elementwise residual addition of two equally shaped streams.
class ResidualAddStage : public Stage {
public:
    ResidualAddStage(std::string name, StreamChannel& a, StreamChannel& b, StreamChannel& out, const QLayer& layer,
                     std::size_t count, RequantMode mode);
    bool step() override;
    bool done() const override;

private:
    StreamChannel& a_;
    StreamChannel& b_;
    OutputPort out_;
    const QLayer& layer_;
    RequantMode mode_;
    std::size_t count_;
    std::size_t next_ = 0;
    std::optional<std::int32_t> held_a_;
};

/// Index of element (c, y, x) of a (C, H, W) tensor in wire order.
inline std::size_t wire_index(int c, int y, int x, int channels, int width) {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
}

/// Converts between CHW tensors and the wire order.
std::vector<std::int32_t> to_wire(const ir::IntTensor& t);
ir::IntTensor from_wire(std::span<const std::int32_t> wire, int channels, int height, int width);

// Single-operator streaming runs, used by tests and benchmarks.

struct StreamOptions {
    Driver driver = Driver::RoundRobin;
    /// FIFO depth between stages; 0 means one output row.
    std::size_t fifo_depth = 0;
    /// Pointwise multiply lanes; 0 means N (full parallelism).
    int lanes = 0;
    RequantMode mode = RequantMode::FixedPoint;
    std::ostream* trace = nullptr;
    WindowObserver window_observer;
};

struct StreamRun {
    ir::IntTensor output;
    std::vector<ChannelStats> channels;
    std::uint64_t macs = 0;
    /// Window convolutions only.
    std::optional<std::size_t> first_output_after;
    /// Pointwise only.
    std::uint64_t passes = 0;
};

/// Streams a normal, group or depthwise convolution with requantization.
StreamRun stream_conv(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts = {});
StreamRun stream_conv_dw(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts = {});
StreamRun stream_conv_normal(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts = {});
StreamRun stream_conv_pw(const QLayer& layer, const ir::IntTensor& input, const StreamOptions& opts = {});
StreamRun avg_pool_stream(const ir::IntTensor& input, const StreamOptions& opts = {});
StreamRun squeeze_excite_stream(const ir::IntTensor& input, const QLayer& squeeze, const QLayer& excite,
                                const QLayer& scale, const StreamOptions& opts = {});
StreamRun residual_add_stream(const ir::IntTensor& a, const ir::IntTensor& b, const QLayer& add,
                              const StreamOptions& opts = {});

} // namespace qnet::kernel
