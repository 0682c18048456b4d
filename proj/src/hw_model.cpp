#include "evframe/hw_model.hpp"

#include <stdexcept>
#include <string>

namespace evframe {

std::size_t map_event_to_address(const Event& event, const SensorGeometry& geometry) {
    if (!geometry.contains(event.x, event.y)) {
        throw std::out_of_range("event (" + std::to_string(event.x) + ", " + std::to_string(event.y)
                                + ") outside " + std::to_string(geometry.width) + "x" + std::to_string(geometry.height));
    }
    return std::size_t{event.y} * geometry.width + event.x;
}

void validate_banks(const SensorGeometry& geometry, std::uint32_t banks) {
    geometry.validate();
    if (banks == 0) throw ConfigError("bank count must be at least 1");
    if (geometry.width % banks != 0) {
        throw ConfigError("bank count " + std::to_string(banks) + " does not divide width " + std::to_string(geometry.width));
    }
}

BankSlot bank_and_offset(std::size_t address, std::uint32_t banks, const SensorGeometry& geometry) {
    validate_banks(geometry, banks);
    if (address >= geometry.pixel_count()) throw std::out_of_range("address " + std::to_string(address) + " outside image");
    const std::size_t x = address % geometry.width;
    return BankSlot{static_cast<std::uint32_t>(x % banks), address / banks};
}

Accumulator::Accumulator(const SensorGeometry& geometry, std::uint32_t banks, const Representation& repr,
                         EncodeTiming timing)
    : geometry_(geometry), banks_(banks), repr_(repr), timing_(timing), lut_(build_decode_lut(repr)) {
    repr.validate();
    if (timing == EncodeTiming::Deferred) {
        if (repr.kind != ReprKind::ExpDecayTS) throw ConfigError("deferred encoding only applies to exp decay");
        stamps_ = BankedMemory<StampedCell>(geometry, banks);
    } else {
        codes_ = BankedMemory<CellCode>(geometry, banks);
        if (repr.kind == ReprKind::ExpDecayTS) decay_.emplace(repr.tau_us);
    }
}

void Accumulator::write(const Event& event, std::uint64_t t_end) {
    if (mode_ != AccessMode::Write) throw std::logic_error("accumulator write while in read mode");
    const std::size_t address = map_event_to_address(event, geometry_);
    if (timing_ == EncodeTiming::Deferred) {
        stamps_[address] = StampedCell{event.t, static_cast<std::int8_t>(sign_of(event.p))};
        return;
    }
    CellCode& cell = codes_[address];
    switch (repr_.kind) {
    case ReprKind::Binary: cell = CellCode{1}; break;
    case ReprKind::EventFrame:
        cell = event.p == Polarity::Positive ? codes::kEventPositive : codes::kEventNegative;
        break;
    case ReprKind::ExpDecayTS: cell = decay_->encode(event.t, t_end, event.p); break;
    case ReprKind::EventFrequency: cell = update_cell(repr_, cell, event, t_end); break;
    }
}

Frame Accumulator::begin_readout(std::uint64_t t_end, std::uint64_t window_index, std::uint64_t decay_tau_us) {
    mode_ = AccessMode::Read;
    Frame frame(geometry_, 0, t_end, window_index);
    std::uint8_t* out = frame.pixels.data();
    if (timing_ == EncodeTiming::Deferred) {
        const std::uint8_t empty = lut_[kBackground];
        if (decay_tau_us == 0) throw std::invalid_argument("deferred readout needs a decay interval");
        stamps_.raster_scan([&](std::size_t address, StampedCell& cell) {
            out[address] = cell.empty()
                ? empty
                : lut_[encode_exp_decay(cell.t, t_end, decay_tau_us, cell.p > 0 ? Polarity::Positive : Polarity::Negative)];
            cell = StampedCell{};
        });
    } else {
        codes_.raster_scan([&](std::size_t address, CellCode& cell) {
            out[address] = lut_[cell];
            cell = kBackground;
        });
    }
    return frame;
}

CellCode Accumulator::cell(std::size_t address) const {
    if (timing_ == EncodeTiming::Deferred) throw std::logic_error("deferred accumulator holds timestamps, not codes");
    if (address >= geometry_.pixel_count()) throw std::out_of_range("address outside image");
    return codes_[address];
}

std::size_t Accumulator::occupied_cells() const {
    std::size_t n = 0;
    for (std::uint32_t b = 0; b < banks_; ++b) {
        if (timing_ == EncodeTiming::Deferred) {
            for (const StampedCell& c : stamps_.bank(b)) n += c.empty() ? 0 : 1;
        } else {
            for (const CellCode c : codes_.bank(b)) n += c == kBackground ? 0 : 1;
        }
    }
    return n;
}

EventFifo::EventFifo(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("FIFO capacity must be at least 1");
    ring_.resize(capacity == kUnbounded ? 1024 : capacity);
}

void EventFifo::grow() {
    std::vector<Event> bigger(ring_.size() * 2);
    for (std::size_t i = 0; i < size_; ++i) bigger[i] = ring_[(head_ + i) % ring_.size()];
    ring_ = std::move(bigger);
    head_ = 0;
}

std::optional<Event> EventFifo::push(const Event& event, bool in_read_mode) {
    ++pushes_;
    std::optional<Event> evicted;
    if (size_ == capacity_) {
        evicted = ring_[head_];
        head_ = (head_ + 1) % ring_.size();
        --size_;
        ++(in_read_mode ? dropped_read_ : dropped_write_);
    } else if (size_ == ring_.size()) {
        grow();
    }
    std::size_t tail = head_ + size_;
    if (tail >= ring_.size()) tail -= ring_.size();
    ring_[tail] = event;
    ++size_;
    if (size_ > max_occupancy_) max_occupancy_ = size_;
    return evicted;
}

std::optional<Event> EventFifo::pop() {
    if (size_ == 0) return std::nullopt;
    const Event e = ring_[head_];
    head_ = head_ + 1 == ring_.size() ? 0 : head_ + 1;
    --size_;
    ++pops_;
    return e;
}

void TimingConfig::validate() const {
    if (clock_hz == 0) throw ConfigError("clock frequency must be positive");
    if (pixels_per_clock == 0) throw ConfigError("pixels per clock must be at least 1");
}

std::uint64_t readout_cycles(const SensorGeometry& geometry, const TimingConfig& timing) {
    timing.validate();
    const std::uint64_t pixels = geometry.pixel_count();
    return (pixels + timing.pixels_per_clock - 1) / timing.pixels_per_clock;
}

std::chrono::nanoseconds readout_latency(const SensorGeometry& geometry, const TimingConfig& timing) {
    const unsigned __int128 scaled = static_cast<unsigned __int128>(readout_cycles(geometry, timing)) * 1'000'000'000u;
    const auto ns = static_cast<std::int64_t>((scaled + timing.clock_hz - 1) / timing.clock_hz);
    return std::chrono::nanoseconds(ns);
}

std::uint64_t readout_latency_us(const SensorGeometry& geometry, const TimingConfig& timing) {
    const auto ns = static_cast<std::uint64_t>(readout_latency(geometry, timing).count());
    return (ns + 999) / 1000;
}

}// namespace evframe
