#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "evframe/event_io.hpp"

namespace evframe {
namespace {

const SensorGeometry kHd{1280, 720};

TEST(ParseEventLine, MapsFieldsDirectly) {
    const Event e = parse_event_line("1000,8,5,1", kHd);
    EXPECT_EQ(e, (Event{1000, 8, 5, Polarity::Positive}));
}

TEST(ParseEventLine, ZeroPolarityIsNegative) {
    EXPECT_EQ(parse_event_line("0,0,0,0", kHd), (Event{0, 0, 0, Polarity::Negative}));
    EXPECT_EQ(parse_event_line("7,1,2,-1", kHd).p, Polarity::Negative);
    EXPECT_EQ(parse_event_line("7,1,2,+1", kHd).p, Polarity::Positive);
}

TEST(ParseEventLine, ToleratesWhitespaceAndCarriageReturn) {
    EXPECT_EQ(parse_event_line(" 12 , 3 ,4, 1\r", kHd), (Event{12, 3, 4, Polarity::Positive}));
}

TEST(ParseEventLine, RejectsOutOfRangeColumn) {
    try {
        parse_event_line("5,1280,10,1", kHd, 17);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 17u);
        EXPECT_EQ(e.field(), "x");
        EXPECT_NE(std::string(e.what()).find("x out of range"), std::string::npos);
    }
}

TEST(ParseEventLine, RejectsOutOfRangeRow) {
    try {
        parse_event_line("5,0,720,1", kHd);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.field(), "y");
    }
}

TEST(ParseEventLine, ErrorsNameTheField) {
    const auto field_of = [](std::string_view line) {
        try {
            parse_event_line(line, kHd, 3);
        } catch (const ParseError& e) {
            return e.field();
        }
        return std::string("none");
    };
    EXPECT_EQ(field_of("1,2,3"), "p");
    EXPECT_EQ(field_of("1,2,3,1,9"), "p");
    EXPECT_EQ(field_of("abc,2,3,1"), "t");
    EXPECT_EQ(field_of("-4,2,3,1"), "t");
    EXPECT_EQ(field_of("4,2x,3,1"), "x");
    EXPECT_EQ(field_of("4,2,,1"), "y");
    EXPECT_EQ(field_of("4,2,3,2"), "p");
    EXPECT_EQ(field_of("99999999999999999999999,2,3,1"), "t");
}

TEST(ParseEventLine, TextRoundTripProperty) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint64_t> t(0, std::numeric_limits<std::uint64_t>::max());
    std::uniform_int_distribution<std::uint32_t> x(0, kHd.width - 1);
    std::uniform_int_distribution<std::uint32_t> y(0, kHd.height - 1);
    for (int i = 0; i < 5000; ++i) {
        const Event e{t(rng), x(rng), y(rng), (rng() & 1) ? Polarity::Positive : Polarity::Negative};
        EXPECT_EQ(parse_event_line(format_event_line(e), kHd), e);
    }
}

TEST(ReadEventStream, StrictKeepsOrder) {
    std::istringstream in("1,0,0,1\n2,0,0,1\n3,0,0,0\n");
    const auto stream = read_event_stream(in, kHd, OrderPolicy::Strict);
    ASSERT_EQ(stream.events.size(), 3u);
    EXPECT_EQ(stream.events[2].t, 3u);
    EXPECT_EQ(stream.out_of_order, 0u);
}

TEST(ReadEventStream, StrictRejectsDecreasingTimestamp) {
    std::istringstream in("2,0,0,1\n1,0,0,1\n");
    try {
        read_event_stream(in, kHd, OrderPolicy::Strict);
        FAIL();
    } catch (const StreamOrderError& e) {
        EXPECT_EQ(e.previous(), 2u);
        EXPECT_EQ(e.current(), 1u);
        EXPECT_NE(std::string(e.what()).find("2 -> 1"), std::string::npos);
    }
}

TEST(ReadEventStream, SortIsStable) {
    std::istringstream in("2,5,0,1\n1,0,0,1\n2,6,0,1\n1,1,0,0\n");
    const auto stream = read_event_stream(in, kHd, OrderPolicy::Sort);
    ASSERT_EQ(stream.events.size(), 4u);
    EXPECT_EQ(stream.events[0], (Event{1, 0, 0, Polarity::Positive}));
    EXPECT_EQ(stream.events[1], (Event{1, 1, 0, Polarity::Negative}));
    EXPECT_EQ(stream.events[2].x, 5u);
    EXPECT_EQ(stream.events[3].x, 6u);
}

TEST(ReadEventStream, WarnPassesThroughAndCounts) {
    std::istringstream in("2,0,0,1\n1,0,0,1\n3,0,0,1\n");
    const auto stream = read_event_stream(in, kHd, OrderPolicy::Warn);
    ASSERT_EQ(stream.events.size(), 3u);
    EXPECT_EQ(stream.events[1].t, 1u);
    EXPECT_EQ(stream.out_of_order, 1u);
}

TEST(ReadEventStream, SkipsBlankAndCommentLinesAndReportsLineNumbers) {
    std::istringstream in("# t,x,y,p\n\n1,0,0,1\n2,9999,0,1");
    try {
        read_event_stream(in, kHd, OrderPolicy::Strict);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(ReadEventStream, SortPropertyYieldsNonDecreasingTimes) {
    std::mt19937 rng(5);
    for (int round = 0; round < 50; ++round) {
        std::ostringstream text;
        for (int i = 0; i < 200; ++i) text << rng() % 1000 << ',' << rng() % 64 << ',' << rng() % 48 << ',' << rng() % 2 << '\n';
        std::istringstream in(text.str());
        const auto stream = read_event_stream(in, {64, 48}, OrderPolicy::Sort);
        EXPECT_TRUE(std::is_sorted(stream.events.begin(), stream.events.end(),
                                   [](const Event& a, const Event& b) { return a.t < b.t; }));
    }
}

TEST(EventReader, HandlesLinesSpanningChunkBoundaries) {
    std::ostringstream text;
    for (int i = 0; i < 1000; ++i) text << i << ',' << i % 64 << ',' << i % 48 << ',' << i % 2 << '\n';
    std::istringstream in(text.str());
    EventReader reader(in, {64, 48}, 256);
    std::vector<Event> all;
    while (reader.next_batch(all, 37)) {
    }
    ASSERT_EQ(all.size(), 1000u);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(all[i].t, static_cast<std::uint64_t>(i));
}

TEST(EventReader, MixedLineFormsAgreeWithLineParser) {
    const std::string text =
        "1,2,3,1\r\n"
        " 4, 5,6,0\n"
        "7,8,9,-1\n"
        "10,11,12,+1\n"
        "# note\n"
        "13,14,15,1";
    std::istringstream in(text);
    const auto stream = read_event_stream(in, kHd, OrderPolicy::Strict);
    const std::vector<Event> expected{{1, 2, 3, Polarity::Positive},
                                      {4, 5, 6, Polarity::Negative},
                                      {7, 8, 9, Polarity::Negative},
                                      {10, 11, 12, Polarity::Positive},
                                      {13, 14, 15, Polarity::Positive}};
    EXPECT_EQ(stream.events, expected);
}

TEST(EventReader, ErrorsSurviveTheFastPath) {
    const auto error_field = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_event_stream(in, kHd, OrderPolicy::Strict);
        } catch (const ParseError& e) {
            return std::to_string(e.line()) + ":" + e.field();
        }
        return std::string("none");
    };
    EXPECT_EQ(error_field("1,0,0,1\n2,1280,0,1\n"), "2:x");
    EXPECT_EQ(error_field("1,0,720,1\n"), "1:y");
    EXPECT_EQ(error_field("1,0,0,2\n"), "1:p");
    EXPECT_EQ(error_field("1,0,0,11\n"), "1:p");
    EXPECT_EQ(error_field("99999999999999999999,0,0,1\n"), "1:t");
    EXPECT_EQ(error_field("18446744073709551615,0,0,1\n"), "none");
    EXPECT_EQ(error_field("1,0,0\n"), "1:p");
}

TEST(WritePgm, TwoPixelFrameIsBitExact) {
    Frame f({2, 1}, 0);
    f.pixels = {0, 255};
    std::ostringstream out;
    write_frame_pgm(f, out);
    EXPECT_EQ(out.str(), std::string("P5\n2 1\n255\n\x00\xFF", 13));
}

TEST(WritePgm, SinglePixel) {
    Frame f({1, 1}, 128);
    std::ostringstream out;
    write_frame_pgm(f, out);
    EXPECT_EQ(out.str(), std::string("P5\n1 1\n255\n\x80", 12));
}

TEST(WritePgm, HdHeaderRoundTrip) {
    Frame f(kHd, 128);
    f.pixels[5] = 3;
    std::stringstream io;
    write_frame_pgm(f, io);
    const Frame back = read_frame_pgm(io);
    EXPECT_EQ(back.width, 1280u);
    EXPECT_EQ(back.height, 720u);
    EXPECT_EQ(back.pixels, f.pixels);
}

TEST(WritePgm, RandomFramesRoundTrip) {
    std::mt19937 rng(3);
    for (int i = 0; i < 30; ++i) {
        Frame f({static_cast<std::uint32_t>(1 + rng() % 40), static_cast<std::uint32_t>(1 + rng() % 40)}, 0);
        for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng());
        std::stringstream io;
        write_frame_pgm(f, io);
        EXPECT_EQ(read_frame_pgm(io).pixels, f.pixels);
    }
}

TEST(WritePgm, ReportsSinkFailure) {
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    EXPECT_THROW(write_frame_pgm(Frame({1, 1}, 0), out), std::runtime_error);
}

TEST(FrameFileName, ZeroPadsToSixDigits) {
    EXPECT_EQ(frame_file_name(0), "frame_000000.pgm");
    EXPECT_EQ(frame_file_name(1234), "frame_001234.pgm");
}

TEST(Synthetic, DeterministicForSeed) {
    SyntheticSpec spec;
    spec.pattern = SyntheticPattern::MovingDot;
    spec.seed = 42;
    spec.duration_us = 20'000;
    const auto a = generate_synthetic_events(spec);
    const auto b = generate_synthetic_events(spec);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b);
    spec.seed = 43;
    EXPECT_NE(generate_synthetic_events(spec), a);
}

TEST(Synthetic, UniformNoiseCountWithinFiveSigma) {
    SyntheticSpec spec;
    spec.geometry = {64, 48};
    spec.pattern = SyntheticPattern::UniformNoise;
    spec.rate = 2.0e6;
    spec.duration_us = 50'000;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        spec.seed = seed;
        const double expected = spec.rate * static_cast<double>(spec.duration_us) / 1e6;
        const double n = static_cast<double>(generate_synthetic_events(spec).size());
        EXPECT_LE(std::abs(n - expected), 5.0 * std::sqrt(expected)) << "seed " << seed;
    }
}

TEST(Synthetic, EventsRespectGeometryAndOrder) {
    for (auto pattern : {SyntheticPattern::MovingDot, SyntheticPattern::MovingEdge, SyntheticPattern::UniformNoise}) {
        SyntheticSpec spec;
        spec.geometry = {96, 40};
        spec.pattern = pattern;
        spec.duration_us = 30'000;
        spec.seed = 1;
        const auto events = generate_synthetic_events(spec);
        ASSERT_FALSE(events.empty());
        for (std::size_t i = 0; i < events.size(); ++i) {
            ASSERT_TRUE(spec.geometry.contains(events[i].x, events[i].y));
            ASSERT_LT(events[i].t, spec.duration_us);
            if (i) ASSERT_LE(events[i - 1].t, events[i].t);
        }
    }
}

TEST(Synthetic, MovingEdgeLeadsWithPositivePolarity) {
    SyntheticSpec spec;
    spec.geometry = {128, 32};
    spec.pattern = SyntheticPattern::MovingEdge;
    spec.duration_us = 100'000;
    spec.seed = 9;
    const auto events = generate_synthetic_events(spec);
    // Within any short slice the positive events sit to the right of the negative ones.
    double pos = 0, neg = 0;
    int np = 0, nn = 0;
    for (const Event& e : events) {
        if (e.t < 40'000 || e.t >= 42'000) continue;
        if (e.p == Polarity::Positive) pos += e.x, ++np;
        else neg += e.x, ++nn;
    }
    ASSERT_GT(np, 0);
    ASSERT_GT(nn, 0);
    EXPECT_GT(pos / np, neg / nn);
}

TEST(Synthetic, RejectsBadParameters) {
    SyntheticSpec spec;
    spec.rate = 0;
    EXPECT_THROW(generate_synthetic_events(spec), ConfigError);
    spec.rate = 1;
    spec.geometry = {0, 5};
    EXPECT_THROW(generate_synthetic_events(spec), ConfigError);
    EXPECT_THROW(parse_synthetic_pattern("spiral"), ConfigError);
}

}// namespace
}// namespace evframe
