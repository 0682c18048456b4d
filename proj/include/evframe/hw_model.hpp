#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "evframe/event_io.hpp"
#include "evframe/representation.hpp"

namespace evframe {

/// address = y * width + x. Throws std::out_of_range for coordinates outside the sensor.
std::size_t map_event_to_address(const Event& event, const SensorGeometry& geometry);

struct BankSlot {
    std::uint32_t bank = 0;
    std::size_t offset = 0;

    friend bool operator==(const BankSlot&, const BankSlot&) = default;
};

/// Throws ConfigError unless banks >= 1 and banks divides the sensor width.
void validate_banks(const SensorGeometry& geometry, std::uint32_t banks);

/// The column picks the bank (x mod X); the cell within the bank is address div X, so read
/// cycle c touches addresses c*X .. c*X+X-1, one per bank.
BankSlot bank_and_offset(std::size_t address, std::uint32_t banks, const SensorGeometry& geometry);

/// X parallel memories covering one sensor image.
template <typename Cell>
class BankedMemory {
  public:
    BankedMemory() = default;
    BankedMemory(const SensorGeometry& geometry, std::uint32_t banks) : banks_(banks) {
        validate_banks(geometry, banks);
        cells_.assign(banks, std::vector<Cell>(geometry.pixel_count() / banks));
        if ((banks & (banks - 1)) == 0) {
            while ((1u << shift_) < banks) ++shift_;
        } else {
            shift_ = -1;
        }
    }

    Cell& operator[](std::size_t address) noexcept { return cells_[bank_of(address)][offset_of(address)]; }
    const Cell& operator[](std::size_t address) const noexcept { return cells_[bank_of(address)][offset_of(address)]; }

    std::uint32_t banks() const noexcept { return banks_; }
    std::size_t cells_per_bank() const noexcept { return cells_.empty() ? 0 : cells_.front().size(); }
    const std::vector<Cell>& bank(std::uint32_t b) const { return cells_.at(b); }

    /// Visits every cell in raster order, one read cycle (X cells, one per bank) at a time.
    /// `visit(address, cell)` may modify the cell, which models the write-back port.
    template <typename Visit>
    void raster_scan(Visit&& visit) {
        const std::size_t depth = cells_per_bank();
        for (std::size_t cycle = 0; cycle < depth; ++cycle) {
            for (std::uint32_t b = 0; b < banks_; ++b) visit(cycle * banks_ + b, cells_[b][cycle]);
        }
    }

  private:
    std::size_t bank_of(std::size_t address) const noexcept {
        return shift_ >= 0 ? address & (banks_ - 1) : address % banks_;
    }
    std::size_t offset_of(std::size_t address) const noexcept {
        return shift_ >= 0 ? address >> shift_ : address / banks_;
    }

    std::uint32_t banks_ = 0;
    // log2(banks) when banks is a power of two, else -1.
    int shift_ = 0;
    std::vector<std::vector<Cell>> cells_;
};

enum class AccessMode { Write, Read };

/// When the stored code is formed. OnWrite is the hardware path: the code is final when the
/// event is written. Deferred keeps the latest (t, p) per pixel and encodes the decayed
/// magnitude at readout, for triggers whose window end is unknown at write time.
enum class EncodeTiming { OnWrite, Deferred };

struct StampedCell {
    std::uint64_t t = 0;
    std::int8_t p = 0;// 0 = empty

    bool empty() const noexcept { return p == 0; }
};

/// Banked per-pixel store with reset-on-read.
class Accumulator {
  public:
    Accumulator(const SensorGeometry& geometry, std::uint32_t banks, const Representation& repr,
                EncodeTiming timing = EncodeTiming::OnWrite);

    /// Read-modify-write of the event's cell. Throws std::logic_error in Read mode.
    /// `t_end` is the end of the window being accumulated (used by OnWrite exp decay).
    void write(const Event& event, std::uint64_t t_end);

    /// Enters Read mode and scans the whole image: every cell is decoded and then reset to the
    /// background code. Stays in Read mode until end_readout().
    /// `decay_tau_us` is only consulted for Deferred exp decay.
    Frame begin_readout(std::uint64_t t_end, std::uint64_t window_index, std::uint64_t decay_tau_us = 0);
    void end_readout() noexcept { mode_ = AccessMode::Write; }

    Frame readout(std::uint64_t t_end, std::uint64_t window_index, std::uint64_t decay_tau_us = 0) {
        Frame f = begin_readout(t_end, window_index, decay_tau_us);
        end_readout();
        return f;
    }

    AccessMode mode() const noexcept { return mode_; }
    const SensorGeometry& geometry() const noexcept { return geometry_; }
    std::uint32_t banks() const noexcept { return banks_; }
    const Representation& representation() const noexcept { return repr_; }
    EncodeTiming encode_timing() const noexcept { return timing_; }

    /// Stored code at `address`. OnWrite only.
    CellCode cell(std::size_t address) const;
    /// Cells currently holding something other than the background.
    std::size_t occupied_cells() const;

  private:
    SensorGeometry geometry_;
    std::uint32_t banks_;
    Representation repr_;
    EncodeTiming timing_;
    AccessMode mode_ = AccessMode::Write;
    DecodeLut lut_;
    std::optional<ExpDecayTable> decay_;
    BankedMemory<CellCode> codes_;
    BankedMemory<StampedCell> stamps_;
};

/// Bounded event queue that evicts the oldest element to admit a new one when full.
class EventFifo {
  public:
    static constexpr std::size_t kDefaultCapacity = 32768;
    static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

    explicit EventFifo(std::size_t capacity = kDefaultCapacity);

    /// Returns the evicted event, if the queue was full.
    std::optional<Event> push(const Event& event, bool in_read_mode);
    std::optional<Event> pop();
    const Event* front() const noexcept { return size_ ? &ring_[head_] : nullptr; }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    std::size_t capacity() const noexcept { return capacity_; }

    std::uint64_t drop_count() const noexcept { return dropped_read_; }
    /// Evictions that happened while the consumer was in write mode.
    std::uint64_t write_mode_drop_count() const noexcept { return dropped_write_; }
    std::uint64_t total_dropped() const noexcept { return dropped_read_ + dropped_write_; }
    std::uint64_t pushes() const noexcept { return pushes_; }
    std::uint64_t pops() const noexcept { return pops_; }
    std::size_t max_occupancy() const noexcept { return max_occupancy_; }

  private:
    void grow();

    std::size_t capacity_;
    std::vector<Event> ring_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
    std::uint64_t dropped_read_ = 0;
    std::uint64_t dropped_write_ = 0;
    std::uint64_t pushes_ = 0;
    std::uint64_t pops_ = 0;
    std::size_t max_occupancy_ = 0;
};

struct TimingConfig {
    /// Modeled datapath clock.
    std::uint64_t clock_hz = 100'000'000;
    std::uint32_t pixels_per_clock = 1;

    void validate() const;
};

/// ceil(W*H / X) clock cycles.
std::uint64_t readout_cycles(const SensorGeometry& geometry, const TimingConfig& timing);
/// Time to scan the whole accumulator, rounded up to whole nanoseconds.
std::chrono::nanoseconds readout_latency(const SensorGeometry& geometry, const TimingConfig& timing);
/// readout_latency rounded up to whole microseconds, the pipeline's time unit.
std::uint64_t readout_latency_us(const SensorGeometry& geometry, const TimingConfig& timing);

}// namespace evframe
