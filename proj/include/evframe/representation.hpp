#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "evframe/event_io.hpp"

namespace evframe {

enum class ReprKind : std::uint8_t { Binary, EventFrame, ExpDecayTS, EventFrequency };

struct Representation {
    ReprKind kind = ReprKind::EventFrame;
    /// Accumulation interval in microseconds.
    std::uint64_t tau_us = 10'000;

    void validate() const;
};

ReprKind parse_repr_kind(std::string_view name);
std::string_view repr_name(ReprKind kind);

/// Stored per-pixel code. Code 0 is the background (empty) value for every representation,
/// which is what the readout port writes back.
///
///   Binary          1 bit   0 = none, 1 = event
///   EventFrame      2 bits  0 = none, 1 = positive, 2 = negative
///   ExpDecayTS      8 bits  sign-magnitude, bit 7 set for negative, bits 0..6 magnitude
///   EventFrequency  5 bits  two's complement polarity sum in [-16, 15]
struct CellCode {
    std::uint8_t raw = 0;

    friend bool operator==(CellCode, CellCode) = default;
};

inline constexpr CellCode kBackground{0};

namespace codes {
inline constexpr CellCode kEventNone{0};
inline constexpr CellCode kEventPositive{1};
inline constexpr CellCode kEventNegative{2};

inline constexpr int kFrequencyMin = -16;
inline constexpr int kFrequencyMax = 15;
inline constexpr std::uint8_t kMagnitudeMax = 127;

constexpr CellCode frequency(int sum) noexcept { return CellCode{static_cast<std::uint8_t>(sum & 0x1F)}; }
constexpr int frequency_value(CellCode c) noexcept { return (c.raw & 0x10) ? int(c.raw & 0x1F) - 32 : int(c.raw & 0x1F); }

constexpr CellCode signed_magnitude(Polarity p, std::uint8_t magnitude) noexcept {
    return CellCode{static_cast<std::uint8_t>((p == Polarity::Negative ? 0x80 : 0x00) | (magnitude & 0x7F))};
}
constexpr std::uint8_t magnitude_of(CellCode c) noexcept { return c.raw & 0x7F; }
constexpr bool is_negative(CellCode c) noexcept { return (c.raw & 0x80) != 0; }
}// namespace codes

/// Stored bits per pixel: 1, 2, 8 or 5.
unsigned code_bits(ReprKind kind) noexcept;

/// Magnitude 127 * e^{-(t_end - t_event)/tau}, rounded half-up, as a sign-magnitude code.
/// Throws std::out_of_range unless 0 <= t_end - t_event <= tau.
CellCode encode_exp_decay(std::uint64_t t_event, std::uint64_t t_end, std::uint64_t tau_us, Polarity p);

/// Table of decayed magnitudes indexed by age (t_end - t_event) in microseconds.
/// Produces the same codes as encode_exp_decay; long intervals fall back to direct evaluation.
class ExpDecayTable {
  public:
    static constexpr std::uint64_t kMaxTabulatedTau = 1u << 22;

    explicit ExpDecayTable(std::uint64_t tau_us);

    CellCode encode(std::uint64_t t_event, std::uint64_t t_end, Polarity p) const;
    std::uint64_t tau_us() const noexcept { return tau_us_; }

  private:
    std::uint64_t tau_us_;
    std::vector<std::uint8_t> magnitude_;
};

/// New code after `event` hits a cell holding `old`. `t_end` is the readout instant the
/// exponential decay is measured against.
CellCode update_cell(const Representation& repr, CellCode old, const Event& event, std::uint64_t t_end);

std::uint8_t decode_cell(ReprKind kind, CellCode code) noexcept;
inline std::uint8_t decode_cell(const Representation& repr, CellCode code) noexcept { return decode_cell(repr.kind, code); }

/// Gray level for a cell with no event.
std::uint8_t background_gray(ReprKind kind) noexcept;

struct DecodeLut {
    /// 2^bits entries.
    std::vector<std::uint8_t> table;

    std::uint8_t operator[](CellCode c) const noexcept { return table[c.raw]; }
};

DecodeLut build_decode_lut(const Representation& repr);

}// namespace evframe
