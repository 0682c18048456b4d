#include <gtest/gtest.h>

#include <random>

#include "evframe/representation.hpp"

namespace evframe {
namespace {

Representation make(ReprKind kind, std::uint64_t tau = 10'000) { return Representation{kind, tau}; }

Event at(std::uint64_t t, Polarity p) { return Event{t, 0, 0, p}; }

TEST(CodeBits, PerRepresentation) {
    EXPECT_EQ(code_bits(ReprKind::Binary), 1u);
    EXPECT_EQ(code_bits(ReprKind::EventFrame), 2u);
    EXPECT_EQ(code_bits(ReprKind::ExpDecayTS), 8u);
    EXPECT_EQ(code_bits(ReprKind::EventFrequency), 5u);
}

TEST(ParseReprKind, NamesRoundTrip) {
    for (auto k : {ReprKind::Binary, ReprKind::EventFrame, ReprKind::ExpDecayTS, ReprKind::EventFrequency}) {
        EXPECT_EQ(parse_repr_kind(repr_name(k)), k);
    }
    EXPECT_EQ(parse_repr_kind("event_frequency"), ReprKind::EventFrequency);
    EXPECT_THROW(parse_repr_kind("histogram"), ConfigError);
}

TEST(UpdateCell, FrequencySaturatesAtFifteen) {
    const auto r = make(ReprKind::EventFrequency);
    EXPECT_EQ(update_cell(r, codes::frequency(15), at(0, Polarity::Positive), 0), codes::frequency(15));
    EXPECT_EQ(update_cell(r, codes::frequency(-16), at(0, Polarity::Negative), 0), codes::frequency(-16));
    EXPECT_EQ(codes::frequency_value(update_cell(r, codes::frequency(3), at(0, Polarity::Negative), 0)), 2);
}

TEST(UpdateCell, EventFrameLatestOverwrites) {
    const auto r = make(ReprKind::EventFrame);
    EXPECT_EQ(update_cell(r, codes::kEventNegative, at(0, Polarity::Positive), 0), codes::kEventPositive);
    EXPECT_EQ(update_cell(r, codes::kEventPositive, at(0, Polarity::Negative), 0), codes::kEventNegative);
}

TEST(UpdateCell, BinaryIsIdempotent) {
    const auto r = make(ReprKind::Binary);
    EXPECT_EQ(update_cell(r, CellCode{1}, at(0, Polarity::Negative), 0), CellCode{1});
    EXPECT_EQ(update_cell(r, kBackground, at(0, Polarity::Positive), 0), CellCode{1});
}

TEST(UpdateCell, ExpDecayOverwritesWithLatest) {
    const auto r = make(ReprKind::ExpDecayTS, 10'000);
    const CellCode first = update_cell(r, kBackground, at(5'000, Polarity::Negative), 10'000);
    EXPECT_TRUE(codes::is_negative(first));
    EXPECT_EQ(codes::magnitude_of(first), 77);
    const CellCode second = update_cell(r, first, at(10'000, Polarity::Positive), 10'000);
    EXPECT_EQ(second, codes::signed_magnitude(Polarity::Positive, 127));
}

TEST(EncodeExpDecay, FixedPoints) {
    const std::uint64_t tau = 10'000;
    EXPECT_EQ(encode_exp_decay(50'000, 50'000, tau, Polarity::Positive), codes::signed_magnitude(Polarity::Positive, 127));
    EXPECT_EQ(encode_exp_decay(40'000, 50'000, tau, Polarity::Positive), codes::signed_magnitude(Polarity::Positive, 47));
    EXPECT_EQ(encode_exp_decay(45'000, 50'000, tau, Polarity::Negative), codes::signed_magnitude(Polarity::Negative, 77));
}

TEST(EncodeExpDecay, RejectsEventsOutsideInterval) {
    EXPECT_THROW(encode_exp_decay(39'999, 50'000, 10'000, Polarity::Positive), std::out_of_range);
    EXPECT_THROW(encode_exp_decay(50'001, 50'000, 10'000, Polarity::Positive), std::out_of_range);
}

TEST(EncodeExpDecay, MagnitudeNonIncreasingWithAge) {
    for (std::uint64_t tau : {1ull, 7ull, 255ull, 10'000ull}) {
        int previous = 128;
        for (std::uint64_t age = 0; age <= tau; ++age) {
            const int m = codes::magnitude_of(encode_exp_decay(tau - age, tau, tau, Polarity::Positive));
            EXPECT_LE(m, previous) << "tau " << tau << " age " << age;
            EXPECT_GE(m, 47);
            previous = m;
        }
    }
}

TEST(ExpDecayTable, MatchesDirectEvaluation) {
    for (std::uint64_t tau : {1ull, 3ull, 1000ull, 10'000ull}) {
        const ExpDecayTable table(tau);
        for (std::uint64_t age = 0; age <= tau; ++age) {
            for (auto p : {Polarity::Positive, Polarity::Negative}) {
                ASSERT_EQ(table.encode(100'000 - age, 100'000, p), encode_exp_decay(100'000 - age, 100'000, tau, p));
            }
        }
    }
}

TEST(ExpDecayTable, LongIntervalsFallBackToDirect) {
    const std::uint64_t tau = ExpDecayTable::kMaxTabulatedTau * 2;
    const ExpDecayTable table(tau);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t age = rng() % (tau + 1);
        ASSERT_EQ(table.encode(tau * 3 - age, tau * 3, Polarity::Negative),
                  encode_exp_decay(tau * 3 - age, tau * 3, tau, Polarity::Negative));
    }
}

TEST(DecodeCell, EventFrameFixedPoints) {
    EXPECT_EQ(decode_cell(ReprKind::EventFrame, codes::kEventPositive), 255);
    EXPECT_EQ(decode_cell(ReprKind::EventFrame, codes::kEventNegative), 0);
    EXPECT_EQ(decode_cell(ReprKind::EventFrame, codes::kEventNone), 128);
}

TEST(DecodeCell, Binary) {
    EXPECT_EQ(decode_cell(ReprKind::Binary, CellCode{0}), 0);
    EXPECT_EQ(decode_cell(ReprKind::Binary, CellCode{1}), 255);
}

TEST(DecodeCell, FrequencyEndpointsAndCenter) {
    EXPECT_EQ(decode_cell(ReprKind::EventFrequency, codes::frequency(-16)), 0);
    EXPECT_EQ(decode_cell(ReprKind::EventFrequency, codes::frequency(15)), 255);
    EXPECT_EQ(decode_cell(ReprKind::EventFrequency, codes::frequency(0)), 128);
}

TEST(DecodeCell, FrequencyTableValues) {
    // round_half_up(255 / (1 + e^{-x/2})) for x = -16..15, evaluated offline.
    const int expected[32] = {0,   0,   0,   0,   1,   1,   2,   3,   5,   7,   12,  19,  30,  47,  69,  96,
                              128, 159, 186, 208, 225, 236, 243, 248, 250, 252, 253, 254, 254, 255, 255, 255};
    for (int x = -16; x <= 15; ++x) {
        EXPECT_EQ(decode_cell(ReprKind::EventFrequency, codes::frequency(x)), expected[x + 16]) << "x=" << x;
    }
}

TEST(DecodeCell, FrequencySymmetryUpToRounding) {
    for (int x = -15; x <= 15; ++x) {
        const int sum = decode_cell(ReprKind::EventFrequency, codes::frequency(x)) +
                        decode_cell(ReprKind::EventFrequency, codes::frequency(-x));
        EXPECT_TRUE(sum == 255 || sum == 256) << "x=" << x << " sum=" << sum;
    }
}

TEST(DecodeCell, ExpDecayCentersOnMidGray) {
    EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, kBackground), 128);
    EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Positive, 127)), 255);
    EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Negative, 127)), 1);
    EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Positive, 47)), 175);
    EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Negative, 77)), 51);
}

TEST(DecodeCell, ExpDecayDistanceFromMidGrayTracksMagnitude) {
    for (int m = 1; m <= 127; ++m) {
        const auto mag = static_cast<std::uint8_t>(m);
        EXPECT_EQ(decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Positive, mag)) - 128, m);
        EXPECT_EQ(128 - decode_cell(ReprKind::ExpDecayTS, codes::signed_magnitude(Polarity::Negative, mag)), m);
    }
}

TEST(BackgroundGray, PerRepresentation) {
    EXPECT_EQ(background_gray(ReprKind::Binary), 0);
    EXPECT_EQ(background_gray(ReprKind::EventFrame), 128);
    EXPECT_EQ(background_gray(ReprKind::ExpDecayTS), 128);
    EXPECT_EQ(background_gray(ReprKind::EventFrequency), 128);
}

TEST(DecodeLut, SizesAndKnownEntries) {
    EXPECT_EQ(build_decode_lut(make(ReprKind::EventFrequency)).table.size(), 32u);
    EXPECT_EQ(build_decode_lut(make(ReprKind::ExpDecayTS)).table.size(), 256u);
    EXPECT_EQ(build_decode_lut(make(ReprKind::EventFrame))[codes::kEventNone], 128);
}

TEST(DecodeLut, ExhaustivelyEqualsDirectDecode) {
    for (auto k : {ReprKind::Binary, ReprKind::EventFrame, ReprKind::ExpDecayTS, ReprKind::EventFrequency}) {
        const DecodeLut lut = build_decode_lut(make(k));
        for (unsigned c = 0; c < (1u << code_bits(k)); ++c) {
            const CellCode code{static_cast<std::uint8_t>(c)};
            ASSERT_EQ(lut[code], decode_cell(k, code)) << repr_name(k) << " code " << c;
        }
    }
}

TEST(DecodeLut, FrequencyEntriesNonDecreasing) {
    const DecodeLut lut = build_decode_lut(make(ReprKind::EventFrequency));
    for (int x = -16; x < 15; ++x) EXPECT_LE(lut[codes::frequency(x)], lut[codes::frequency(x + 1)]);
}

TEST(FrequencyCode, TwoComplementRoundTrip) {
    for (int x = -16; x <= 15; ++x) {
        EXPECT_LT(codes::frequency(x).raw, 32);
        EXPECT_EQ(codes::frequency_value(codes::frequency(x)), x);
    }
    EXPECT_EQ(codes::frequency(0), kBackground);
}

TEST(UpdateCell, FrequencySaturationProperty) {
    const auto r = make(ReprKind::EventFrequency);
    std::mt19937 rng(17);
    for (int run = 0; run < 200; ++run) {
        CellCode c = kBackground;
        int model = 0;
        const int bias = static_cast<int>(rng() % 5);
        for (int i = 0; i < 200; ++i) {
            const bool up = static_cast<int>(rng() % 4) < bias || (bias == 2 && rng() % 2);
            c = update_cell(r, c, at(0, up ? Polarity::Positive : Polarity::Negative), 0);
            model = std::clamp(model + (up ? 1 : -1), -16, 15);
            ASSERT_GE(codes::frequency_value(c), -16);
            ASSERT_LE(codes::frequency_value(c), 15);
            ASSERT_EQ(codes::frequency_value(c), model);
        }
    }
}

TEST(Representation, ValidateRejectsZeroInterval) {
    EXPECT_THROW(make(ReprKind::ExpDecayTS, 0).validate(), ConfigError);
    EXPECT_NO_THROW(make(ReprKind::ExpDecayTS, 1).validate());
}

}// namespace
}// namespace evframe
