#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "evframe/event_io.hpp"
#include "evframe/pipeline.hpp"
#include "evframe/representation.hpp"

// Brute-force reference frames computed straight from the per-pixel definitions over fully
// materialized event lists. Nothing here touches the accumulator, the FIFO, the banked
// memories or the decode tables, so the streaming path can be checked against it.
namespace evframe::oracle {

/// Events with t_start <= t < t_end.
struct DenseWindow {
    std::uint64_t t_start = 0;
    std::uint64_t t_end = 0;
    std::vector<Event> events;
};

DenseWindow make_dense_window(std::span<const Event> events, std::uint64_t t_start, std::uint64_t t_end);

/// Per-pixel scan in time order. ExpDecayTS measures age against `t_end` with interval `repr.tau_us`;
/// EventFrequency is a saturating counter over [-16, 15].
Frame dense_frame(std::span<const Event> events, const Representation& repr, const SensorGeometry& geometry,
                  std::uint64_t t_end);

/// Frame emitted at the end of absolute sub-window `n`: each pixel's latest event from the last
/// N/K sub-windows, shown only if it falls in the last M/K. Exp decay uses t_end = (n+1)K and
/// interval M; event frequency sums the pixel's events within that latest sub-window.
Frame rolling_frame(std::span<const Event> events, const RollingWindow& window, std::uint64_t n,
                    const Representation& repr, const SensorGeometry& geometry);

/// Complete frame sequences for a trigger, numbered like the pipeline output.
std::vector<Frame> time_windowed_frames(std::span<const Event> events, const Representation& repr,
                                        const SensorGeometry& geometry, std::uint64_t tau_us, bool flush);
std::vector<Frame> count_windowed_frames(std::span<const Event> events, const Representation& repr,
                                         const SensorGeometry& geometry, std::uint64_t events_per_frame, bool flush);
std::vector<Frame> rolling_frames(std::span<const Event> events, const Representation& repr,
                                  const SensorGeometry& geometry, const RollingWindow& window, bool flush);

/// Dispatches on `config.trigger`; buffering, banks and timing are irrelevant to the reference.
std::vector<Frame> reference_frames(std::span<const Event> events, const PipelineConfig& config, bool flush);

}// namespace evframe::oracle
