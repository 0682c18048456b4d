#include "evframe/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evframe/rounding.hpp"

namespace evframe::oracle {

namespace {

std::vector<Event> time_ordered(std::span<const Event> events) {
    std::vector<Event> sorted(events.begin(), events.end());
    std::stable_sort(sorted.begin(), sorted.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
    return sorted;
}

std::size_t pixel_of(const Event& e, const SensorGeometry& g) {
    if (e.x >= g.width || e.y >= g.height) throw std::out_of_range("oracle: event outside sensor");
    return std::size_t{e.y} * g.width + e.x;
}

int clamp_sum(int s) { return std::clamp(s, -16, 15); }

std::uint8_t frequency_gray(int sum) {
    return static_cast<std::uint8_t>(round_half_up(255.0 / (1.0 + std::exp(-static_cast<double>(sum) / 2.0))));
}

std::uint8_t decay_gray(std::uint64_t t, std::uint64_t t_end, std::uint64_t tau, int polarity) {
    if (t > t_end || t_end - t > tau) throw std::out_of_range("oracle: event outside the decay interval");
    const double age = static_cast<double>(t) - static_cast<double>(t_end);
    const auto m = round_half_up(127.0 * std::exp(age / static_cast<double>(tau)));
    return static_cast<std::uint8_t>(polarity > 0 ? 128 + m : 128 - m);
}

struct PixelState {
    bool seen = false;
    int last_polarity = 0;
    std::uint64_t last_t = 0;
    int sum = 0;
};

std::uint8_t gray_of(const PixelState& s, const Representation& repr, std::uint64_t t_end, std::uint64_t tau) {
    switch (repr.kind) {
    case ReprKind::Binary: return s.seen ? 255 : 0;
    case ReprKind::EventFrame:
        if (!s.seen) return 128;
        return s.last_polarity > 0 ? 255 : 0;
    case ReprKind::ExpDecayTS:
        if (!s.seen) return 128;
        return decay_gray(s.last_t, t_end, tau, s.last_polarity);
    case ReprKind::EventFrequency: return frequency_gray(s.sum);
    }
    return 0;
}

}// namespace

DenseWindow make_dense_window(std::span<const Event> events, std::uint64_t t_start, std::uint64_t t_end) {
    DenseWindow w{t_start, t_end, {}};
    for (const Event& e : events) {
        if (e.t >= t_start && e.t < t_end) w.events.push_back(e);
    }
    return w;
}

Frame dense_frame(std::span<const Event> events, const Representation& repr, const SensorGeometry& geometry,
                  std::uint64_t t_end) {
    std::vector<PixelState> state(geometry.pixel_count());
    for (const Event& e : time_ordered(events)) {
        PixelState& s = state[pixel_of(e, geometry)];
        const int p = sign_of(e.p);
        s.seen = true;
        s.last_polarity = p;
        s.last_t = e.t;
        s.sum = clamp_sum(s.sum + p);
    }
    Frame frame(geometry, 0, t_end);
    for (std::size_t i = 0; i < state.size(); ++i) frame.pixels[i] = gray_of(state[i], repr, t_end, repr.tau_us);
    return frame;
}

Frame rolling_frame(std::span<const Event> events, const RollingWindow& window, std::uint64_t n,
                    const Representation& repr, const SensorGeometry& geometry) {
    const std::uint64_t k = window.step_us;
    if (k == 0 || window.visible_us % k || window.span_us % k || k > window.visible_us || window.visible_us > window.span_us) {
        throw std::invalid_argument("oracle: rolling window needs K <= M <= N with K dividing M and N");
    }
    const std::uint64_t retained = window.span_us / k;
    const std::uint64_t visible = window.visible_us / k;
    const std::uint64_t t_end = (n + 1) * k;

    struct Latest {
        bool seen = false;
        std::uint64_t subwindow = 0;
        PixelState state;
    };
    std::vector<Latest> latest(geometry.pixel_count());
    for (const Event& e : time_ordered(events)) {
        const std::uint64_t w = e.t / k;
        if (w > n || w + retained <= n) continue;
        Latest& cell = latest[pixel_of(e, geometry)];
        if (!cell.seen || cell.subwindow != w) cell = Latest{true, w, {}};
        const int p = sign_of(e.p);
        cell.state.seen = true;
        cell.state.last_polarity = p;
        cell.state.last_t = e.t;
        cell.state.sum = clamp_sum(cell.state.sum + p);
    }

    Frame frame(geometry, 0, t_end);
    const PixelState empty;
    for (std::size_t i = 0; i < latest.size(); ++i) {
        const Latest& cell = latest[i];
        const bool shown = cell.seen && cell.subwindow + visible > n;
        frame.pixels[i] = gray_of(shown ? cell.state : empty, repr, t_end, window.visible_us);
    }
    return frame;
}

std::vector<Frame> time_windowed_frames(std::span<const Event> events, const Representation& repr,
                                        const SensorGeometry& geometry, std::uint64_t tau_us, bool flush) {
    std::vector<Frame> frames;
    if (events.empty()) return frames;
    const auto sorted = time_ordered(events);
    const std::uint64_t first = sorted.front().t / tau_us;
    const std::uint64_t last = sorted.back().t / tau_us;
    Representation r = repr;
    r.tau_us = tau_us;
    for (std::uint64_t n = first; n < last + (flush ? 1 : 0); ++n) {
        const DenseWindow w = make_dense_window(sorted, n * tau_us, (n + 1) * tau_us);
        Frame f = dense_frame(w.events, r, geometry, w.t_end);
        f.window_index = frames.size();
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Frame> count_windowed_frames(std::span<const Event> events, const Representation& repr,
                                         const SensorGeometry& geometry, std::uint64_t events_per_frame, bool flush) {
    std::vector<Frame> frames;
    for (std::size_t begin = 0; begin < events.size(); begin += events_per_frame) {
        const std::size_t end = std::min<std::size_t>(events.size(), begin + events_per_frame);
        if (end - begin < events_per_frame && !flush) break;
        const auto chunk = events.subspan(begin, end - begin);
        Representation r = repr;
        r.tau_us = std::max<std::uint64_t>(1, chunk.back().t - chunk.front().t);
        Frame f = dense_frame(chunk, r, geometry, chunk.back().t);
        f.window_index = frames.size();
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Frame> rolling_frames(std::span<const Event> events, const Representation& repr,
                                  const SensorGeometry& geometry, const RollingWindow& window, bool flush) {
    std::vector<Frame> frames;
    if (events.empty()) return frames;
    const auto [lo, hi] = std::minmax_element(events.begin(), events.end(),
                                              [](const Event& a, const Event& b) { return a.t < b.t; });
    const std::uint64_t first = lo->t / window.step_us;
    const std::uint64_t last = hi->t / window.step_us;
    for (std::uint64_t n = first; n < last + (flush ? 1 : 0); ++n) {
        Frame f = rolling_frame(events, window, n, repr, geometry);
        f.window_index = frames.size();
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<Frame> reference_frames(std::span<const Event> events, const PipelineConfig& config, bool flush) {
    if (const auto* w = std::get_if<TimeWindow>(&config.trigger)) {
        return time_windowed_frames(events, config.repr, config.geometry, w->tau_us, flush);
    }
    if (const auto* c = std::get_if<CountWindow>(&config.trigger)) {
        return count_windowed_frames(events, config.repr, config.geometry, c->events, flush);
    }
    return rolling_frames(events, config.repr, config.geometry, std::get<RollingWindow>(config.trigger), flush);
}

}// namespace evframe::oracle
