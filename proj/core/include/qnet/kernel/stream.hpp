// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace qnet::kernel {

class Pipeline;

/// Bounded FIFO of integer elements between two stages. Operations never
/// block; a stage that cannot push or pop reports no progress and the
/// driver retries it later.
class StreamChannel {
public:
    StreamChannel(int id, std::string name, std::size_t capacity, Pipeline* owner);

    int id() const { return id_; }
    const std::string& name() const { return name_; }
    std::size_t capacity() const { return buf_.size(); }

    bool try_push(std::int32_t v);
    bool try_pop(std::int32_t& v);
    std::size_t size() const;
    std::size_t free_space() const;

    /// Producer signals end of stream.
    void close();
    bool closed() const;
    /// Closed and empty: no element will ever arrive again.
    bool exhausted() const;

    std::uint64_t pushed() const { return pushed_.load(); }
    std::uint64_t popped() const { return popped_.load(); }
    std::size_t peak() const;

private:
    int id_;
    std::string name_;
    Pipeline* owner_;
    mutable std::mutex mu_;
    std::vector<std::int32_t> buf_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    std::size_t peak_ = 0;
    bool closed_ = false;
    std::atomic<std::uint64_t> pushed_{0};
    std::atomic<std::uint64_t> popped_{0};
};

/// A deterministic state machine consuming and producing stream elements.
class Stage {
public:
    explicit Stage(std::string name) : name_(std::move(name)) {}
    virtual ~Stage() = default;
    Stage(const Stage&) = delete;
    Stage& operator=(const Stage&) = delete;

    const std::string& name() const { return name_; }

    /// Does a bounded amount of work without blocking. Returns true when any
    /// element moved. Throws StreamError on underrun.
    virtual bool step() = 0;
    virtual bool done() const = 0;

    /// Multiply-accumulates performed so far.
    std::uint64_t macs() const { return macs_; }

protected:
    std::uint64_t macs_ = 0;

private:
    std::string name_;
};

/// Output side helper: results that could not be pushed yet wait here, and
/// the stage produces nothing new until they drain.
class OutputPort {
public:
    explicit OutputPort(StreamChannel& ch) : ch_(&ch) {}

    bool idle() const { return next_ == pending_.size(); }
    void emit(std::int32_t v) { pending_.push_back(v); }
    /// Pushes pending elements; returns true if at least one moved.
    bool flush();
    void close() { ch_->close(); }
    StreamChannel& channel() { return *ch_; }

private:
    StreamChannel* ch_;
    std::vector<std::int32_t> pending_;
    std::size_t next_ = 0;
};

/// Pops one element, throwing StreamError when the producer closed the
/// channel before `stage` received everything it expects.
bool pop_or_underrun(StreamChannel& ch, std::int32_t& v, const Stage& stage);

enum class Driver { RoundRobin, Threaded };

std::string_view to_string(Driver d);
Driver driver_from_string(std::string_view s);

struct ChannelStats {
    std::string name;
    std::size_t capacity = 0;
    std::uint64_t pushed = 0;
    std::uint64_t popped = 0;
    std::size_t peak = 0;

    bool operator==(const ChannelStats&) const = default;
};

/// Owns the channels and stages of one compute-unit invocation and runs
/// them to completion.
class Pipeline {
public:
    Pipeline() = default;
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    StreamChannel& channel(std::string name, std::size_t capacity);

    template <typename S, typename... Args>
    S& add(Args&&... args) {
        auto s = std::make_unique<S>(std::forward<Args>(args)...);
        S& ref = *s;
        stages_.push_back(std::move(s));
        return ref;
    }

    /// Trace sink: one line per push, "<tick> <channel id> <value>". The
    /// tick is the round-robin pass index, or the per-channel element index
    /// under the threaded driver.
    void set_trace(std::ostream* out) { trace_ = out; }

    /// Runs every stage to completion. Throws StreamError on deadlock (no
    /// stage can progress) or underrun; all channels must be drained at the
    /// end.
    void run(Driver driver);

    /// Wakes blocked stages under the threaded driver. Stages whose progress
    /// depends on state outside the channels call this after changing it.
    void wake() { notify(); }

    std::vector<ChannelStats> channel_stats() const;
    std::uint64_t total_macs() const;
    std::uint64_t passes() const { return passes_; }
    const std::vector<std::unique_ptr<Stage>>& stages() const { return stages_; }

private:
    friend class StreamChannel;
    void on_push(const StreamChannel& ch, std::uint64_t index, std::int32_t v);
    void notify();
    void run_round_robin();
    void run_threaded();
    void check_drained() const;
    [[noreturn]] void throw_deadlock() const;

    std::vector<std::unique_ptr<StreamChannel>> channels_;
    std::vector<std::unique_ptr<Stage>> stages_;
    std::ostream* trace_ = nullptr;
    std::mutex trace_mu_;
    std::uint64_t passes_ = 0;
    bool threaded_ = false;

    std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t generation_ = 0;
};

} // namespace qnet::kernel
