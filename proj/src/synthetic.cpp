#include <algorithm>
#include <cmath>
#include <random>

#include "evframe/event_io.hpp"

namespace evframe {

SyntheticPattern parse_synthetic_pattern(std::string_view name) {
    if (name == "moving_dot" || name == "moving-dot") return SyntheticPattern::MovingDot;
    if (name == "moving_edge" || name == "moving-edge") return SyntheticPattern::MovingEdge;
    if (name == "uniform_noise" || name == "uniform-noise") return SyntheticPattern::UniformNoise;
    throw ConfigError("unknown synthetic pattern '" + std::string(name) + "'");
}

std::vector<Event> generate_synthetic_events(const SyntheticSpec& spec) {
    spec.geometry.validate();
    if (!(spec.rate > 0.0) || !std::isfinite(spec.rate)) throw ConfigError("synthetic rate must be positive");
    if (spec.duration_us == 0) throw ConfigError("synthetic duration must be positive");

    const auto width = static_cast<std::int64_t>(spec.geometry.width);
    const auto height = static_cast<std::int64_t>(spec.geometry.height);
    const double duration = static_cast<double>(spec.duration_us);

    std::mt19937_64 rng(spec.seed);
    std::exponential_distribution<double> gap(spec.rate / 1.0e6);
    std::bernoulli_distribution leading(0.5);
    std::uniform_int_distribution<std::int64_t> any_x(0, width - 1);
    std::uniform_int_distribution<std::int64_t> any_y(0, height - 1);

    const std::int64_t radius = std::max<std::int64_t>(2, std::min(width, height) / 20);
    const std::int64_t bar = std::max<std::int64_t>(1, width / 32);
    std::uniform_int_distribution<std::int64_t> chord_dy(-radius, radius);

    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(std::min(spec.rate * duration / 1.0e6 * 1.1 + 16.0, 5.0e7)));

    double clock = 0.0;
    while (true) {
        clock += gap(rng);
        if (clock >= duration) break;
        const auto t = static_cast<std::uint64_t>(clock);
        const double progress = clock / duration;

        std::int64_t x = 0;
        std::int64_t y = 0;
        Polarity p = Polarity::Positive;
        switch (spec.pattern) {
        case SyntheticPattern::UniformNoise:
            x = any_x(rng);
            y = any_y(rng);
            p = leading(rng) ? Polarity::Positive : Polarity::Negative;
            break;
        case SyntheticPattern::MovingDot: {
            const double cx = -static_cast<double>(radius) + progress * static_cast<double>(width + 2 * radius);
            const std::int64_t dy = chord_dy(rng);
            const auto half = static_cast<std::int64_t>(std::sqrt(static_cast<double>(radius * radius - dy * dy)));
            const bool front = leading(rng);
            x = std::llround(cx) + (front ? half : -half);
            y = height / 2 + dy;
            p = front ? Polarity::Positive : Polarity::Negative;
            break;
        }
        case SyntheticPattern::MovingEdge: {
            const auto lead = static_cast<std::int64_t>(progress * static_cast<double>(width + bar));
            const bool front = leading(rng);
            x = front ? lead : lead - bar;
            y = any_y(rng);
            p = front ? Polarity::Positive : Polarity::Negative;
            break;
        }
        }
        if (x < 0 || x >= width || y < 0 || y >= height) continue;
        events.push_back(Event{t, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), p});
    }
    return events;
}

}// namespace evframe
