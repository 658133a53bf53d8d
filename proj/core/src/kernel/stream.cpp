// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#include "qnet/kernel/stream.hpp"

#include <algorithm>
#include <exception>
#include <sstream>
#include <thread>

#include "qnet/error.hpp"

namespace qnet::kernel {

StreamChannel::StreamChannel(int id, std::string name, std::size_t capacity, Pipeline* owner)
    : id_(id), name_(std::move(name)), owner_(owner), buf_(capacity) {
    if (capacity == 0)
        throw StreamError("channel '" + name_ + "' needs a positive capacity");
}

bool StreamChannel::try_push(std::int32_t v) {
    std::uint64_t index = 0;
    {
        std::lock_guard lk(mu_);
        if (closed_)
            throw StreamError("push to closed channel '" + name_ + "'");
        if (count_ == buf_.size())
            return false;
        buf_[(head_ + count_) % buf_.size()] = v;
        ++count_;
        peak_ = std::max(peak_, count_);
        index = pushed_.fetch_add(1);
    }
    if (owner_)
        owner_->on_push(*this, index, v);
    return true;
}

bool StreamChannel::try_pop(std::int32_t& v) {
    {
        std::lock_guard lk(mu_);
        if (count_ == 0)
            return false;
        v = buf_[head_];
        head_ = (head_ + 1) % buf_.size();
        --count_;
        popped_.fetch_add(1);
    }
    if (owner_)
        owner_->notify();
    return true;
}

std::size_t StreamChannel::size() const {
    std::lock_guard lk(mu_);
    return count_;
}

std::size_t StreamChannel::free_space() const {
    std::lock_guard lk(mu_);
    return buf_.size() - count_;
}

void StreamChannel::close() {
    {
        std::lock_guard lk(mu_);
        closed_ = true;
    }
    if (owner_)
        owner_->notify();
}

bool StreamChannel::closed() const {
    std::lock_guard lk(mu_);
    return closed_;
}

bool StreamChannel::exhausted() const {
    std::lock_guard lk(mu_);
    return closed_ && count_ == 0;
}

std::size_t StreamChannel::peak() const {
    std::lock_guard lk(mu_);
    return peak_;
}

bool OutputPort::flush() {
    bool moved = false;
    while (next_ < pending_.size() && ch_->try_push(pending_[next_])) {
        ++next_;
        moved = true;
    }
    if (next_ == pending_.size()) {
        pending_.clear();
        next_ = 0;
    }
    return moved;
}

bool pop_or_underrun(StreamChannel& ch, std::int32_t& v, const Stage& stage) {
    if (ch.try_pop(v))
        return true;
    if (ch.exhausted())
        throw StreamError("stream underrun: '" + stage.name() + "' expects more elements on closed channel '" +
                          ch.name() + "'");
    return false;
}

std::string_view to_string(Driver d) { return d == Driver::RoundRobin ? "round-robin" : "threaded"; }

Driver driver_from_string(std::string_view s) {
    if (s == "round-robin")
        return Driver::RoundRobin;
    if (s == "threaded")
        return Driver::Threaded;
    throw StreamError("unknown driver '" + std::string(s) + "'");
}

StreamChannel& Pipeline::channel(std::string name, std::size_t capacity) {
    channels_.push_back(
        std::make_unique<StreamChannel>(static_cast<int>(channels_.size()), std::move(name), capacity, this));
    return *channels_.back();
}

void Pipeline::on_push(const StreamChannel& ch, std::uint64_t index, std::int32_t v) {
    if (trace_) {
        std::lock_guard lk(trace_mu_);
        *trace_ << (threaded_ ? index : passes_) << ' ' << ch.id() << ' ' << v << '\n';
    }
    notify();
}

void Pipeline::notify() {
    if (!threaded_)
        return;
    {
        std::lock_guard lk(mu_);
        ++generation_;
    }
    cv_.notify_all();
}

void Pipeline::run(Driver driver) {
    if (driver == Driver::RoundRobin)
        run_round_robin();
    else
        run_threaded();
    check_drained();
}

void Pipeline::run_round_robin() {
    threaded_ = false;
    for (;;) {
        bool progress = false;
        bool all_done = true;
        for (auto& s : stages_) {
            if (s->done())
                continue;
            progress |= s->step();
            all_done &= s->done();
        }
        ++passes_;
        if (all_done)
            return;
        if (!progress)
            throw_deadlock();
    }
}

void Pipeline::run_threaded() {
    threaded_ = true;
    constexpr std::uint64_t kRunning = ~std::uint64_t{0};
    std::size_t active = stages_.size();
    // Generation each blocked stage is waiting on; a stage whose generation
    // is stale is about to wake up and does not count as stuck.
    std::vector<std::uint64_t> wait_gen(stages_.size(), kRunning);
    bool deadlock = false;
    bool abort = false;
    std::vector<std::exception_ptr> errors(stages_.size());
    std::vector<std::thread> threads;

    auto all_stuck = [&] {
        std::size_t stuck = 0;
        for (auto g : wait_gen)
            stuck += g == generation_;
        return stuck == active;
    };

    for (std::size_t i = 0; i < stages_.size(); ++i) {
        threads.emplace_back([&, i] {
            Stage& s = *stages_[i];
            try {
                while (!s.done()) {
                    std::uint64_t gen;
                    {
                        std::lock_guard lk(mu_);
                        if (deadlock || abort)
                            break;
                        gen = generation_;
                    }
                    if (s.step())
                        continue;
                    std::unique_lock lk(mu_);
                    if (generation_ != gen)
                        continue;
                    wait_gen[i] = gen;
                    if (all_stuck()) {
                        deadlock = true;
                        cv_.notify_all();
                    } else {
                        cv_.wait(lk, [&] { return generation_ != gen || deadlock || abort; });
                    }
                    wait_gen[i] = kRunning;
                }
            } catch (...) {
                errors[i] = std::current_exception();
                std::lock_guard lk(mu_);
                abort = true;
            }
            {
                std::lock_guard lk(mu_);
                --active;
                ++generation_;
            }
            cv_.notify_all();
        });
    }
    for (auto& t : threads)
        t.join();
    threaded_ = false;
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    if (deadlock)
        throw_deadlock();
}

void Pipeline::check_drained() const {
    for (const auto& ch : channels_)
        if (ch->pushed() != ch->popped())
            throw StreamError("channel '" + ch->name() + "' ended with " +
                              std::to_string(ch->pushed() - ch->popped()) + " unconsumed elements");
}

void Pipeline::throw_deadlock() const {
    std::ostringstream os;
    os << "pipeline deadlock; channel occupancy:";
    for (const auto& ch : channels_)
        os << ' ' << ch->name() << '=' << ch->size() << '/' << ch->capacity();
    throw StreamError(os.str());
}

std::vector<ChannelStats> Pipeline::channel_stats() const {
    std::vector<ChannelStats> out;
    for (const auto& ch : channels_)
        out.push_back({ch->name(), ch->capacity(), ch->pushed(), ch->popped(), ch->peak()});
    return out;
}

std::uint64_t Pipeline::total_macs() const {
    std::uint64_t n = 0;
    for (const auto& s : stages_)
        n += s->macs();
    return n;
}

} // namespace qnet::kernel
