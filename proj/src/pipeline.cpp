#include "evframe/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace evframe {

void PipelineConfig::validate() const {
    repr.validate();
    validate_banks(geometry, banks);
    if (const auto* w = std::get_if<TimeWindow>(&trigger)) {
        if (w->tau_us == 0) throw ConfigError("time window tau must be positive");
    } else if (const auto* c = std::get_if<CountWindow>(&trigger)) {
        if (c->events == 0) throw ConfigError("count window needs at least one event per frame");
    } else {
        const auto& r = std::get<RollingWindow>(trigger);
        if (r.step_us == 0) throw ConfigError("rolling window step K must be positive");
        if (!(r.step_us <= r.visible_us && r.visible_us <= r.span_us)) {
            throw ConfigError("rolling window needs K <= M <= N");
        }
        if (r.visible_us % r.step_us != 0 || r.span_us % r.step_us != 0) {
            throw ConfigError("rolling window step K must divide both M and N");
        }
        if (r.slots() > 256) throw ConfigError("rolling window supports at most 256 sub-windows (N/K)");
    }
    if (buffering.kind == BufferKind::Fifo && buffering.fifo_capacity == 0) {
        throw ConfigError("FIFO capacity must be at least 1");
    }
    if (const auto* hw = std::get_if<HardwareTimed>(&timing); hw && hw->clock_hz == 0) {
        throw ConfigError("clock frequency must be positive");
    }
}

unsigned subwindow_index_bits(std::uint64_t slots) noexcept {
    unsigned bits = 0;
    while ((std::uint64_t{1} << bits) < slots) ++bits;
    return bits;
}

std::string format_stats(const PipelineStats& stats) {
    std::ostringstream out;
    out << "frames_emitted=" << stats.frames_emitted << '\n'
        << "events_offered=" << stats.events_offered << '\n'
        << "events_processed=" << stats.events_processed << '\n'
        << "events_dropped=" << stats.events_dropped << '\n'
        << "fifo_max_occupancy=" << stats.fifo_max_occupancy << '\n'
        << "modeled_readout_busy_us=" << stats.modeled_readout_busy_us << '\n';
    return out.str();
}

namespace {

/// Rolling-window memory: one (code, sub-window slot) pair per pixel, newest event wins.
class RollingStore {
  public:
    RollingStore(const PipelineConfig& config, const RollingWindow& window)
        : geometry_(config.geometry), repr_(config.repr), window_(window), slots_(window.slots()),
          visible_(window.visible_slots()), lut_(build_decode_lut(config.repr)), memory_(config.geometry, config.banks) {}

    void write(const Event& event) {
        const auto slot = static_cast<std::uint8_t>((event.t / window_.step_us) % slots_);
        RollingCell& cell = memory_[map_event_to_address(event, geometry_)];
        const CellCode old = (cell.value != kBackground && cell.subwindow == slot) ? cell.value : kBackground;
        CellCode value;
        if (repr_.kind == ReprKind::ExpDecayTS) {
            value = event.p == Polarity::Positive ? codes::kEventPositive : codes::kEventNegative;
        } else {
            value = update_cell(repr_, old, event, event.t);
        }
        cell = RollingCell{value, slot, event.t};
    }

    /// Frame at the end of absolute sub-window `n`; afterwards the slot that sub-window n+1
    /// will reuse is cleared.
    Frame emit(std::uint64_t n, std::uint64_t index) {
        const std::uint64_t t_end = (n + 1) * window_.step_us;
        Frame frame(geometry_, 0, t_end, index);
        std::uint8_t* out = frame.pixels.data();
        const std::uint8_t background = lut_[kBackground];
        const std::uint64_t current = n % slots_;
        const std::uint64_t reused = (n + 1) % slots_;
        memory_.raster_scan([&](std::size_t address, RollingCell& cell) {
            std::uint8_t gray = background;
            if (cell.value != kBackground) {
                const std::uint64_t age = (current + slots_ - cell.subwindow) % slots_;
                if (age < visible_) gray = decode(cell, t_end);
                if (cell.subwindow == reused) cell = RollingCell{};
            }
            out[address] = gray;
        });
        return frame;
    }

  private:
    std::uint8_t decode(const RollingCell& cell, std::uint64_t t_end) const {
        if (repr_.kind != ReprKind::ExpDecayTS) return lut_[cell.value];
        const Polarity p = cell.value == codes::kEventPositive ? Polarity::Positive : Polarity::Negative;
        return lut_[encode_exp_decay(cell.t, t_end, window_.visible_us, p)];
    }

    SensorGeometry geometry_;
    Representation repr_;
    RollingWindow window_;
    std::uint64_t slots_;
    std::uint64_t visible_;
    DecodeLut lut_;
    BankedMemory<RollingCell> memory_;
};

enum class TriggerKind { Time, Count, Rolling };

}// namespace

class FramePipeline::Impl {
  public:
    Impl(PipelineConfig config, FrameSink sink) : config_(std::move(config)), sink_(std::move(sink)), fifo_(capacity_for(config_)) {
        config_.validate();
        if (!sink_) throw ConfigError("pipeline needs a frame sink");

        if (const auto* hw = std::get_if<HardwareTimed>(&config_.timing)) {
            latency_us_ = readout_latency_us(config_.geometry, TimingConfig{hw->clock_hz, config_.banks});
            stall_us_ = config_.buffering.kind == BufferKind::PingPong ? 0 : latency_us_;
        }

        Representation repr = config_.repr;
        if (const auto* w = std::get_if<TimeWindow>(&config_.trigger)) {
            kind_ = TriggerKind::Time;
            period_ = w->tau_us;
            repr.tau_us = w->tau_us;
        } else if (const auto* c = std::get_if<CountWindow>(&config_.trigger)) {
            kind_ = TriggerKind::Count;
            count_target_ = c->events;
        } else {
            const auto& r = std::get<RollingWindow>(config_.trigger);
            kind_ = TriggerKind::Rolling;
            period_ = r.step_us;
            rolling_.emplace(config_, r);
        }

        if (kind_ != TriggerKind::Rolling) {
            const EncodeTiming timing = (kind_ == TriggerKind::Count && repr.kind == ReprKind::ExpDecayTS)
                ? EncodeTiming::Deferred
                : EncodeTiming::OnWrite;
            const int copies = config_.buffering.kind == BufferKind::PingPong ? 2 : 1;
            for (int i = 0; i < copies; ++i) accumulators_.emplace_back(config_.geometry, config_.banks, repr, timing);
        }
    }

    void push(const Event& event) {
        if (finished_) throw std::logic_error("pipeline already finished");
        if (started_ && event.t < last_input_t_) throw StreamOrderError(last_input_t_, event.t);
        if (!config_.geometry.contains(event.x, event.y)) {
            throw std::out_of_range("event (" + std::to_string(event.x) + ", " + std::to_string(event.y)
                                    + ") outside sensor");
        }
        if (!started_) start(event.t);
        last_input_t_ = event.t;
        ++stats_.events_offered;

        step(event.t, true);
        if (!reading_ && fifo_.empty()) {
            // Nothing queued ahead and the accumulator is writable: the event passes straight
            // through the queue, so skip the ring buffer.
            passed_through_ = true;
            write(event);
            if (kind_ == TriggerKind::Count && in_window_ == count_target_) start_readout(std::max(event.t, resume_at_));
            stats_.fifo_max_occupancy = std::max<std::uint64_t>(fifo_.max_occupancy(), 1);
            return;
        }
        if (auto evicted = fifo_.push(event, reading_)) {
            ++stats_.events_dropped;
            if (on_drop_) on_drop_(*evicted);
        }
        step(event.t, true);
        stats_.fifo_max_occupancy = std::max<std::uint64_t>(fifo_.max_occupancy(), passed_through_ ? 1 : 0);
    }

    void advance_to(std::uint64_t t_us) {
        if (finished_) throw std::logic_error("pipeline already finished");
        if (!started_) return;
        if (t_us < last_input_t_) throw StreamOrderError(last_input_t_, t_us);
        last_input_t_ = t_us;
        step(t_us, true);
    }

    void finish(bool flush) {
        if (finished_) return;
        step(std::numeric_limits<std::uint64_t>::max(), false);
        if (flush && started_ && (kind_ != TriggerKind::Count || in_window_ > 0)) {
            start_readout(std::max(resume_at_, last_input_t_));
            if (reading_) end_readout();
        }
        finished_ = true;
    }

    void set_drop_observer(DropObserver observer) { on_drop_ = std::move(observer); }
    const PipelineStats& stats() const noexcept { return stats_; }
    const PipelineConfig& config() const noexcept { return config_; }

  private:
    static std::size_t capacity_for(const PipelineConfig& config) {
        return config.buffering.kind == BufferKind::Fifo ? std::max<std::size_t>(config.buffering.fifo_capacity, 1)
                                                         : EventFifo::kUnbounded;
    }

    void start(std::uint64_t t) {
        started_ = true;
        if (kind_ != TriggerKind::Count) {
            subwindow_ = t / period_;
            boundary_ = (subwindow_ + 1) * period_;
        }
    }

    /// Runs the controller up to modeled time `now`. With `idle_boundaries`, a window boundary
    /// that passes with an empty queue still triggers its readout.
    void step(std::uint64_t now, bool idle_boundaries) {
        while (true) {
            if (reading_) {
                if (busy_until_ > now) return;
                end_readout();
                continue;
            }
            if (const Event* front = fifo_.front()) {
                if (kind_ != TriggerKind::Count && front->t >= boundary_) {
                    start_readout(std::max(boundary_, resume_at_));
                    continue;
                }
                const Event event = *fifo_.pop();
                write(event);
                if (kind_ == TriggerKind::Count && in_window_ == count_target_) {
                    start_readout(std::max(event.t, resume_at_));
                }
                continue;
            }
            if (idle_boundaries && kind_ != TriggerKind::Count && boundary_ <= now) {
                start_readout(std::max(boundary_, resume_at_));
                continue;
            }
            return;
        }
    }

    void write(const Event& event) {
        switch (kind_) {
        case TriggerKind::Time: accumulators_[active_].write(event, boundary_); break;
        case TriggerKind::Count:
            if (in_window_ == 0) first_t_ = event.t;
            last_t_ = event.t;
            accumulators_[active_].write(event, event.t);
            break;
        case TriggerKind::Rolling: rolling_->write(event); break;
        }
        ++in_window_;
        ++stats_.events_processed;
    }

    void start_readout(std::uint64_t at) {
        const std::uint64_t index = stats_.frames_emitted;
        Frame frame;
        switch (kind_) {
        case TriggerKind::Time: frame = accumulators_[active_].begin_readout(boundary_, index); break;
        case TriggerKind::Count:
            frame = accumulators_[active_].begin_readout(last_t_, index, std::max<std::uint64_t>(1, last_t_ - first_t_));
            break;
        case TriggerKind::Rolling: frame = rolling_->emit(subwindow_, index); break;
        }

        if (kind_ != TriggerKind::Rolling) {
            if (accumulators_.size() == 2) {
                // Ping-pong: the filled bank drains on its own port while writes switch over.
                accumulators_[active_].end_readout();
                active_ ^= 1;
            } else if (stall_us_ == 0) {
                accumulators_[active_].end_readout();
            }
        }
        if (stall_us_ > 0) {
            reading_ = true;
            busy_until_ = at + stall_us_;
        }
        if (kind_ != TriggerKind::Count) {
            ++subwindow_;
            boundary_ += period_;
        }
        in_window_ = 0;
        stats_.modeled_readout_busy_us += latency_us_;
        ++stats_.frames_emitted;
        sink_(std::move(frame));
    }

    void end_readout() {
        reading_ = false;
        resume_at_ = busy_until_;
        if (!accumulators_.empty()) accumulators_[active_].end_readout();
    }

    PipelineConfig config_;
    FrameSink sink_;
    DropObserver on_drop_;
    EventFifo fifo_;
    TriggerKind kind_ = TriggerKind::Time;
    std::uint64_t period_ = 0;
    std::uint64_t count_target_ = 0;
    std::uint64_t latency_us_ = 0;
    std::uint64_t stall_us_ = 0;

    std::vector<Accumulator> accumulators_;
    std::size_t active_ = 0;
    std::optional<RollingStore> rolling_;

    bool started_ = false;
    bool finished_ = false;
    bool reading_ = false;
    bool passed_through_ = false;
    std::uint64_t subwindow_ = 0;
    std::uint64_t boundary_ = 0;
    std::uint64_t busy_until_ = 0;
    std::uint64_t resume_at_ = 0;
    std::uint64_t last_input_t_ = 0;
    std::uint64_t in_window_ = 0;
    std::uint64_t first_t_ = 0;
    std::uint64_t last_t_ = 0;
    PipelineStats stats_;
};

FramePipeline::FramePipeline(PipelineConfig config, FrameSink sink)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(sink))) {}
FramePipeline::~FramePipeline() = default;
FramePipeline::FramePipeline(FramePipeline&&) noexcept = default;
FramePipeline& FramePipeline::operator=(FramePipeline&&) noexcept = default;

void FramePipeline::push(const Event& event) { impl_->push(event); }
void FramePipeline::push(std::span<const Event> events) {
    for (const Event& e : events) impl_->push(e);
}
void FramePipeline::advance_to(std::uint64_t t_us) { impl_->advance_to(t_us); }
void FramePipeline::finish(bool flush) { impl_->finish(flush); }
void FramePipeline::on_drop(DropObserver observer) { impl_->set_drop_observer(std::move(observer)); }
const PipelineStats& FramePipeline::stats() const noexcept { return impl_->stats(); }
const PipelineConfig& FramePipeline::config() const noexcept { return impl_->config(); }

PipelineRun run_pipeline(std::span<const Event> events, const PipelineConfig& config, bool flush) {
    PipelineRun run;
    FramePipeline pipeline(config, [&run](Frame&& f) { run.frames.push_back(std::move(f)); });
    pipeline.push(events);
    pipeline.finish(flush);
    run.stats = pipeline.stats();
    return run;
}

PipelineRun run_time_windowed(std::span<const Event> events, PipelineConfig config, TimeWindow window, bool flush) {
    config.trigger = window;
    return run_pipeline(events, config, flush);
}

PipelineRun run_count_windowed(std::span<const Event> events, PipelineConfig config, CountWindow window, bool flush) {
    config.trigger = window;
    return run_pipeline(events, config, flush);
}

PipelineRun run_rolling_window(std::span<const Event> events, PipelineConfig config, RollingWindow window, bool flush) {
    config.trigger = window;
    return run_pipeline(events, config, flush);
}

}// namespace evframe
