#include "evframe/representation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "evframe/rounding.hpp"

namespace evframe {

void Representation::validate() const {
    if (tau_us == 0) throw ConfigError("tau_us must be positive");
}

ReprKind parse_repr_kind(std::string_view name) {
    if (name == "binary") return ReprKind::Binary;
    if (name == "event-frame" || name == "event_frame") return ReprKind::EventFrame;
    if (name == "exp-decay" || name == "exp_decay") return ReprKind::ExpDecayTS;
    if (name == "event-frequency" || name == "event_frequency") return ReprKind::EventFrequency;
    throw ConfigError("unknown representation '" + std::string(name)
                      + "' (expected binary, event-frame, exp-decay or event-frequency)");
}

std::string_view repr_name(ReprKind kind) {
    switch (kind) {
    case ReprKind::Binary: return "binary";
    case ReprKind::EventFrame: return "event-frame";
    case ReprKind::ExpDecayTS: return "exp-decay";
    case ReprKind::EventFrequency: return "event-frequency";
    }
    return "?";
}

unsigned code_bits(ReprKind kind) noexcept {
    switch (kind) {
    case ReprKind::Binary: return 1;
    case ReprKind::EventFrame: return 2;
    case ReprKind::ExpDecayTS: return 8;
    case ReprKind::EventFrequency: return 5;
    }
    return 0;
}

namespace {

std::uint8_t decayed_magnitude(std::uint64_t age, std::uint64_t tau_us) {
    const double weight = std::exp(-(static_cast<double>(age) / static_cast<double>(tau_us)));
    return static_cast<std::uint8_t>(round_half_up(codes::kMagnitudeMax * weight));
}

}// namespace

CellCode encode_exp_decay(std::uint64_t t_event, std::uint64_t t_end, std::uint64_t tau_us, Polarity p) {
    if (tau_us == 0) throw std::out_of_range("exp decay: tau must be positive");
    if (t_event > t_end || t_end - t_event > tau_us) {
        throw std::out_of_range("exp decay: event at " + std::to_string(t_event) + " outside (" + std::to_string(t_end)
                                + " - " + std::to_string(tau_us) + ", " + std::to_string(t_end) + "]");
    }
    return codes::signed_magnitude(p, decayed_magnitude(t_end - t_event, tau_us));
}

ExpDecayTable::ExpDecayTable(std::uint64_t tau_us) : tau_us_(tau_us) {
    if (tau_us == 0) throw ConfigError("exp decay: tau must be positive");
    if (tau_us <= kMaxTabulatedTau) {
        magnitude_.resize(tau_us + 1);
        for (std::uint64_t age = 0; age <= tau_us; ++age) magnitude_[age] = decayed_magnitude(age, tau_us);
    }
}

CellCode ExpDecayTable::encode(std::uint64_t t_event, std::uint64_t t_end, Polarity p) const {
    if (magnitude_.empty()) return encode_exp_decay(t_event, t_end, tau_us_, p);
    if (t_event > t_end || t_end - t_event > tau_us_) {
        // Reuse the direct path for its diagnostic.
        return encode_exp_decay(t_event, t_end, tau_us_, p);
    }
    return codes::signed_magnitude(p, magnitude_[t_end - t_event]);
}

CellCode update_cell(const Representation& repr, CellCode old, const Event& event, std::uint64_t t_end) {
    switch (repr.kind) {
    case ReprKind::Binary: return CellCode{1};
    case ReprKind::EventFrame:
        return event.p == Polarity::Positive ? codes::kEventPositive : codes::kEventNegative;
    case ReprKind::ExpDecayTS: return encode_exp_decay(event.t, t_end, repr.tau_us, event.p);
    case ReprKind::EventFrequency: {
        int sum = codes::frequency_value(old) + sign_of(event.p);
        if (sum > codes::kFrequencyMax) sum = codes::kFrequencyMax;
        if (sum < codes::kFrequencyMin) sum = codes::kFrequencyMin;
        return codes::frequency(sum);
    }
    }
    return old;
}

std::uint8_t decode_cell(ReprKind kind, CellCode code) noexcept {
    switch (kind) {
    case ReprKind::Binary: return (code.raw & 1) ? 255 : 0;
    case ReprKind::EventFrame:
        if (code == codes::kEventPositive) return 255;
        if (code == codes::kEventNegative) return 0;
        return 128;
    case ReprKind::ExpDecayTS: {
        const int m = codes::magnitude_of(code);
        return static_cast<std::uint8_t>(codes::is_negative(code) ? 128 - m : 128 + m);
    }
    case ReprKind::EventFrequency: {
        const double x = codes::frequency_value(code);
        return static_cast<std::uint8_t>(round_half_up(255.0 / (1.0 + std::exp(-x / 2.0))));
    }
    }
    return 0;
}

std::uint8_t background_gray(ReprKind kind) noexcept { return decode_cell(kind, kBackground); }

DecodeLut build_decode_lut(const Representation& repr) {
    DecodeLut lut;
    lut.table.resize(std::size_t{1} << code_bits(repr.kind));
    for (std::size_t c = 0; c < lut.table.size(); ++c) {
        lut.table[c] = decode_cell(repr.kind, CellCode{static_cast<std::uint8_t>(c)});
    }
    return lut;
}

}// namespace evframe
