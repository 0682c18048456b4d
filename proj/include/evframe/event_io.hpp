#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "evframe/errors.hpp"

namespace evframe {

enum class Polarity : std::int8_t { Negative = -1, Positive = 1 };

constexpr int sign_of(Polarity p) noexcept { return static_cast<int>(p); }

/// One camera event. Timestamps are integer microseconds.
struct Event {
    std::uint64_t t = 0;
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    Polarity p = Polarity::Positive;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
    std::uint32_t width = 1280;
    std::uint32_t height = 720;

    std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }
    bool contains(std::uint32_t x, std::uint32_t y) const noexcept { return x < width && y < height; }

    /// Throws ConfigError on a zero dimension.
    void validate() const;

    friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;
};

/// 8-bit grayscale image, row-major.
struct Frame {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> pixels;
    std::uint64_t t_end = 0;
    std::uint64_t window_index = 0;

    Frame() = default;
    Frame(SensorGeometry geometry, std::uint8_t fill, std::uint64_t t_end = 0, std::uint64_t window_index = 0);

    std::uint8_t at(std::uint32_t x, std::uint32_t y) const { return pixels[std::size_t{y} * width + x]; }
};

enum class OrderPolicy { Strict, Sort, Warn };

/// Parses one `t,x,y,p` line. Polarity accepts 0, 1, -1 and +1; 0 maps to Negative.
/// `line_number` only feeds diagnostics.
Event parse_event_line(std::string_view line, const SensorGeometry& geometry, std::size_t line_number = 1);

/// Canonical text form, `t,x,y,p` with p written as 1 or -1. No trailing newline.
std::string format_event_line(const Event& event);

struct EventStream {
    std::vector<Event> events;
    std::size_t out_of_order = 0;
};

/// Chunked reader over a CSV event source. Blank lines and `#` comments are skipped.
/// Yields events in file order; ordering policy is left to the caller.
class EventReader {
  public:
    EventReader(std::istream& source, SensorGeometry geometry, std::size_t chunk_bytes = 1 << 20);

    /// Appends up to `max_events` events to `out`. Returns false once the source is exhausted
    /// and nothing was appended.
    bool next_batch(std::vector<Event>& out, std::size_t max_events);

    std::size_t lines_read() const noexcept { return line_number_; }
    /// Line number of the most recently parsed event.
    std::size_t last_event_line() const noexcept { return last_event_line_; }

  private:
    bool refill();

    std::istream& source_;
    SensorGeometry geometry_;
    std::vector<char> buffer_;
    std::size_t begin_ = 0;
    std::size_t end_ = 0;
    std::size_t line_number_ = 0;
    std::size_t last_event_line_ = 0;
    bool eof_ = false;
};

EventStream read_event_stream(std::istream& source, const SensorGeometry& geometry, OrderPolicy policy);

/// Binary PGM (P5), maxval 255.
void write_frame_pgm(const Frame& frame, std::ostream& sink);
Frame read_frame_pgm(std::istream& source);

/// `frame_<index:06d>.pgm`
std::string frame_file_name(std::uint64_t window_index);

enum class SyntheticPattern { MovingDot, MovingEdge, UniformNoise };

struct SyntheticSpec {
    SensorGeometry geometry;
    std::uint64_t duration_us = 100'000;
    SyntheticPattern pattern = SyntheticPattern::MovingDot;
    /// Mean event rate in events per second.
    double rate = 1.0e6;
    std::uint64_t seed = 0;
};

/// Deterministic for a fixed spec. Arrival times follow a Poisson process at `rate`; for the
/// moving patterns each arrival is placed on the leading (+1) or trailing (-1) edge of the object.
std::vector<Event> generate_synthetic_events(const SyntheticSpec& spec);

SyntheticPattern parse_synthetic_pattern(std::string_view name);

}// namespace evframe
