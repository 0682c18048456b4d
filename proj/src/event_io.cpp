#include "evframe/event_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>

namespace evframe {

ParseError::ParseError(std::size_t line, std::string field, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + what), line_(line),
      field_(std::move(field)) {}

StreamOrderError::StreamOrderError(std::uint64_t previous, std::uint64_t current, std::size_t line)
    : std::runtime_error((line ? "line " + std::to_string(line) + ": " : std::string{}) + "timestamp decreased "
                         + std::to_string(previous) + " -> " + std::to_string(current)),
      previous_(previous), current_(current) {}

void SensorGeometry::validate() const {
    if (width == 0 || height == 0) {
        throw ConfigError("sensor geometry must be at least 1x1, got " + std::to_string(width) + "x"
                          + std::to_string(height));
    }
}

Frame::Frame(SensorGeometry geometry, std::uint8_t fill, std::uint64_t t_end_us, std::uint64_t index)
    : width(geometry.width), height(geometry.height), pixels(geometry.pixel_count(), fill), t_end(t_end_us),
      window_index(index) {}

namespace {

constexpr std::array<const char*, 4> kFieldNames{"t", "x", "y", "p"};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_unsigned(std::string_view token, std::size_t line, int field) {
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (token.empty()) throw ParseError(line, kFieldNames[field], "empty value");
    if (*first == '-') throw ParseError(line, kFieldNames[field], "negative value '" + std::string(token) + "'");
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw ParseError(line, kFieldNames[field], "value '" + std::string(token) + "' overflows");
    }
    if (ec != std::errc{} || ptr != last) {
        throw ParseError(line, kFieldNames[field], "not an integer: '" + std::string(token) + "'");
    }
    return value;
}

Polarity parse_polarity(std::string_view token, std::size_t line) {
    if (token == "1" || token == "+1") return Polarity::Positive;
    if (token == "0" || token == "-1") return Polarity::Negative;
    throw ParseError(line, "p", "polarity must be one of 0, 1, -1, +1, got '" + std::string(token) + "'");
}

/// Parses one plain `t,x,y,p` line ending in '\n' (optionally "\r\n") starting at `p`.
/// Returns the position after the newline, or nullptr when the line needs the general parser
/// (spaces, comments, signs, overflow, out-of-range coordinates, or no newline before `end`).
const char* scan_plain_line(const char* p, const char* end, const SensorGeometry& geometry, Event& out) {
    const auto digits = [&](std::uint64_t& value, int max_digits) {
        const char* start = p;
        std::uint64_t v = 0;
        while (p < end && static_cast<unsigned>(*p - '0') < 10) {
            v = v * 10 + static_cast<unsigned>(*p - '0');
            ++p;
        }
        value = v;
        return p != start && p - start <= max_digits && p < end;
    };
    std::uint64_t t, x, y;
    if (!digits(t, 19) || *p++ != ',') return nullptr;
    if (!digits(x, 9) || *p++ != ',' || x >= geometry.width) return nullptr;
    if (!digits(y, 9) || *p++ != ',' || y >= geometry.height) return nullptr;
    if (p >= end) return nullptr;
    Polarity pol;
    if (*p == '1') {
        pol = Polarity::Positive;
    } else if (*p == '0') {
        pol = Polarity::Negative;
    } else if (*p == '-' && p + 1 < end && p[1] == '1') {
        pol = Polarity::Negative;
        ++p;
    } else {
        return nullptr;
    }
    ++p;
    if (p < end && *p == '\r') ++p;
    if (p >= end || *p != '\n') return nullptr;
    out = Event{t, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), pol};
    return p + 1;
}

bool is_skippable(std::string_view line) {
    line = trim(line);
    return line.empty() || line.front() == '#';
}

}// namespace

Event parse_event_line(std::string_view line, const SensorGeometry& geometry, std::size_t line_number) {
    std::array<std::string_view, 4> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const std::string_view token = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (count == fields.size()) {
            throw ParseError(line_number, "p", "expected 4 fields (t,x,y,p), found more");
        }
        fields[count++] = token;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (count != fields.size()) {
        throw ParseError(line_number, kFieldNames[count], "expected 4 fields (t,x,y,p), found " + std::to_string(count));
    }

    Event e;
    e.t = parse_unsigned<std::uint64_t>(fields[0], line_number, 0);
    e.x = parse_unsigned<std::uint32_t>(fields[1], line_number, 1);
    e.y = parse_unsigned<std::uint32_t>(fields[2], line_number, 2);
    e.p = parse_polarity(fields[3], line_number);
    if (e.x >= geometry.width) {
        throw ParseError(line_number, "x",
                         "x out of range (" + std::to_string(e.x) + " >= width " + std::to_string(geometry.width) + ")");
    }
    if (e.y >= geometry.height) {
        throw ParseError(line_number, "y",
                         "y out of range (" + std::to_string(e.y) + " >= height " + std::to_string(geometry.height) + ")");
    }
    return e;
}

std::string format_event_line(const Event& event) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%llu,%u,%u,%d", static_cast<unsigned long long>(event.t), event.x,
                                event.y, sign_of(event.p));
    return std::string(buf, static_cast<std::size_t>(n));
}

EventReader::EventReader(std::istream& source, SensorGeometry geometry, std::size_t chunk_bytes)
    : source_(source), geometry_(geometry), buffer_(std::max<std::size_t>(chunk_bytes, 256)) {}

bool EventReader::refill() {
    if (eof_) return false;
    // Keep the unconsumed tail (a partial line) at the front.
    const std::size_t tail = end_ - begin_;
    if (tail == buffer_.size()) buffer_.resize(buffer_.size() * 2);
    std::memmove(buffer_.data(), buffer_.data() + begin_, tail);
    begin_ = 0;
    end_ = tail;
    source_.read(buffer_.data() + end_, static_cast<std::streamsize>(buffer_.size() - end_));
    const auto got = static_cast<std::size_t>(source_.gcount());
    end_ += got;
    if (got == 0 || !source_) eof_ = true;
    return got > 0;
}

bool EventReader::next_batch(std::vector<Event>& out, std::size_t max_events) {
    std::size_t produced = 0;
    while (produced < max_events) {
        const char* base = buffer_.data();
        Event fast;
        if (const char* next = scan_plain_line(base + begin_, base + end_, geometry_, fast)) {
            out.push_back(fast);
            begin_ = static_cast<std::size_t>(next - base);
            last_event_line_ = ++line_number_;
            ++produced;
            continue;
        }
        const void* nl = std::memchr(base + begin_, '\n', end_ - begin_);
        std::string_view line;
        if (nl) {
            const auto pos = static_cast<std::size_t>(static_cast<const char*>(nl) - base);
            line = std::string_view(base + begin_, pos - begin_);
            begin_ = pos + 1;
        } else if (refill()) {
            continue;
        } else if (begin_ < end_) {
            // Final line without a newline.
            line = std::string_view(base + begin_, end_ - begin_);
            begin_ = end_;
        } else {
            break;
        }
        ++line_number_;
        if (is_skippable(line)) continue;
        out.push_back(parse_event_line(line, geometry_, line_number_));
        last_event_line_ = line_number_;
        ++produced;
    }
    return produced > 0;
}

EventStream read_event_stream(std::istream& source, const SensorGeometry& geometry, OrderPolicy policy) {
    EventStream stream;
    EventReader reader(source, geometry);
    while (true) {
        const std::size_t before = stream.events.size();
        if (!reader.next_batch(stream.events, 1)) break;
        if (before > 0 && stream.events[before].t < stream.events[before - 1].t) {
            if (policy == OrderPolicy::Strict) {
                throw StreamOrderError(stream.events[before - 1].t, stream.events[before].t, reader.last_event_line());
            }
            ++stream.out_of_order;
        }
    }
    if (policy == OrderPolicy::Sort) {
        std::stable_sort(stream.events.begin(), stream.events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }
    return stream;
}

void write_frame_pgm(const Frame& frame, std::ostream& sink) {
    if (frame.pixels.size() != std::size_t{frame.width} * frame.height) {
        throw std::invalid_argument("frame pixel count does not match its dimensions");
    }
    sink << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
    sink.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
    if (!sink) throw std::runtime_error("failed to write PGM frame");
}

namespace {

std::uint32_t read_header_number(std::istream& in) {
    // Whitespace and comments may separate header tokens.
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in.get();
        } else {
            break;
        }
    }
    std::uint32_t value = 0;
    if (!(in >> value)) throw std::runtime_error("malformed PGM header");
    return value;
}

}// namespace

Frame read_frame_pgm(std::istream& source) {
    char magic[2]{};
    source.read(magic, 2);
    if (!source || magic[0] != 'P' || magic[1] != '5') throw std::runtime_error("not a binary PGM (P5) stream");
    Frame frame;
    frame.width = read_header_number(source);
    frame.height = read_header_number(source);
    const std::uint32_t maxval = read_header_number(source);
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval " + std::to_string(maxval));
    source.get();// single whitespace before the raster
    frame.pixels.resize(std::size_t{frame.width} * frame.height);
    source.read(reinterpret_cast<char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
    if (static_cast<std::size_t>(source.gcount()) != frame.pixels.size()) {
        throw std::runtime_error("truncated PGM raster");
    }
    return frame;
}

std::string frame_file_name(std::uint64_t window_index) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "frame_%06llu.pgm", static_cast<unsigned long long>(window_index));
    return buf;
}

}// namespace evframe
