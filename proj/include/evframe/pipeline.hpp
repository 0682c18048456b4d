#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evframe/event_io.hpp"
#include "evframe/hw_model.hpp"
#include "evframe/representation.hpp"

namespace evframe {

/// Tumbling windows [n*tau, (n+1)*tau).
struct TimeWindow {
    std::uint64_t tau_us = 10'000;
};

/// One frame per `events` accumulated events.
struct CountWindow {
    std::uint64_t events = 5'000;
};

/// Retain `span_us` (N), emit every `step_us` (K), show the last `visible_us` (M).
struct RollingWindow {
    std::uint64_t span_us = 8'000;
    std::uint64_t visible_us = 4'000;
    std::uint64_t step_us = 1'000;

    std::uint64_t slots() const noexcept { return span_us / step_us; }
    std::uint64_t visible_slots() const noexcept { return visible_us / step_us; }
};

using Trigger = std::variant<TimeWindow, CountWindow, RollingWindow>;

enum class BufferKind { Fifo, PingPong, Unbounded };

struct Buffering {
    BufferKind kind = BufferKind::Fifo;
    std::size_t fifo_capacity = EventFifo::kDefaultCapacity;
};

/// Readout is instantaneous and nothing is ever dropped.
struct Behavioral {};

/// Readout occupies readout_latency() of modeled time; arrivals meanwhile queue in the FIFO.
struct HardwareTimed {
    std::uint64_t clock_hz = 100'000'000;
};

using TimingMode = std::variant<Behavioral, HardwareTimed>;

/// For TimeWindow the exp-decay interval is the window length; for CountWindow it is the
/// span of the window's events (at least 1 us); for RollingWindow it is the visible span M.
struct PipelineConfig {
    Representation repr;
    SensorGeometry geometry;
    std::uint32_t banks = 1;
    Trigger trigger = TimeWindow{};
    Buffering buffering;
    TimingMode timing = Behavioral{};

    void validate() const;
};

/// Rolling-window cell: the representation code plus the slot index of the sub-window that
/// wrote it. `t` is the event time, only read for exp decay.
struct RollingCell {
    CellCode value;
    std::uint8_t subwindow = 0;
    std::uint64_t t = 0;
};

/// ceil(log2 slots); 3 for eight sub-windows.
unsigned subwindow_index_bits(std::uint64_t slots) noexcept;

struct PipelineStats {
    std::uint64_t frames_emitted = 0;
    std::uint64_t events_offered = 0;
    std::uint64_t events_processed = 0;
    std::uint64_t events_dropped = 0;
    std::uint64_t fifo_max_occupancy = 0;
    std::uint64_t modeled_readout_busy_us = 0;

    friend bool operator==(const PipelineStats&, const PipelineStats&) = default;
};

/// `key=value` lines.
std::string format_stats(const PipelineStats& stats);

using FrameSink = std::function<void(Frame&&)>;
using DropObserver = std::function<void(const Event&)>;

/// Streams events into the modeled accumulator and hands finished frames to a sink in order.
/// Single owner; events must arrive with non-decreasing timestamps.
class FramePipeline {
  public:
    FramePipeline(PipelineConfig config, FrameSink sink);
    ~FramePipeline();
    FramePipeline(FramePipeline&&) noexcept;
    FramePipeline& operator=(FramePipeline&&) noexcept;

    /// Throws StreamOrderError if `event.t` is earlier than the previous event.
    void push(const Event& event);
    void push(std::span<const Event> events);

    /// Lets modeled time run to `t_us` without new input: window boundaries up to and
    /// including `t_us` produce their frames.
    void advance_to(std::uint64_t t_us);

    /// Drains everything still queued. With `flush`, the open window is emitted as a final
    /// partial frame. The pipeline accepts no more events afterwards.
    void finish(bool flush);

    void on_drop(DropObserver observer);
    const PipelineStats& stats() const noexcept;
    const PipelineConfig& config() const noexcept;

  private:
    class Impl;
    std::unique_ptr<Impl> impl_;
};

struct PipelineRun {
    std::vector<Frame> frames;
    PipelineStats stats;
};

PipelineRun run_pipeline(std::span<const Event> events, const PipelineConfig& config, bool flush = true);

/// run_pipeline with the trigger replaced by the named window.
PipelineRun run_time_windowed(std::span<const Event> events, PipelineConfig config, TimeWindow window, bool flush = true);
PipelineRun run_count_windowed(std::span<const Event> events, PipelineConfig config, CountWindow window, bool flush = true);
PipelineRun run_rolling_window(std::span<const Event> events, PipelineConfig config, RollingWindow window,
                               bool flush = true);

}// namespace evframe
