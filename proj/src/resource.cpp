#include "evframe/resource.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace evframe {

std::string format_blocks(BlockCount count) {
    std::string s = std::to_string(count.halves / 2);
    if (count.halves % 2) s += ".5";
    return s;
}

const std::vector<PlatformProfile>& builtin_platforms() {
    static const std::vector<PlatformProfile> platforms{
        {"zcu104", 312, 96, 4.5},
        {"kv260", 144, 64, 4.0},
        {"zybo-z7-20", 140, 0, 1.0},
    };
    return platforms;
}

std::optional<PlatformProfile> find_platform(std::string_view name, const std::vector<PlatformProfile>& platforms) {
    for (const auto& p : platforms) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::uint64_t parse_count(std::string_view value, std::size_t line, std::string_view key) {
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("platform file line " + std::to_string(line) + ": " + std::string(key)
                          + " must be a non-negative integer");
    }
    return n;
}

double parse_gb(std::string_view value, std::size_t line) {
    try {
        std::size_t used = 0;
        const std::string text(value);
        const double v = std::stod(text, &used);
        if (used == text.size() && v >= 0.0 && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("platform file line " + std::to_string(line) + ": external_ram_gb must be a non-negative number");
}

}// namespace

std::vector<PlatformProfile> parse_platform_profiles(std::istream& source) {
    std::vector<PlatformProfile> out;
    std::optional<PlatformProfile> current;
    std::size_t line_number = 0;
    std::string raw;

    const auto close = [&] {
        if (!current) return;
        if (current->name.empty()) throw ConfigError("platform stanza ending at line " + std::to_string(line_number) + " has no name");
        out.push_back(*current);
        current.reset();
    };

    while (std::getline(source, raw)) {
        ++line_number;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            close();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == line.npos) throw ConfigError("platform file line " + std::to_string(line_number) + ": expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!current) current.emplace();
        if (key == "name") {
            if (value.empty()) throw ConfigError("platform file line " + std::to_string(line_number) + ": empty name");
            current->name = std::string(value);
        } else if (key == "bram_blocks") {
            current->bram_blocks = parse_count(value, line_number, key);
        } else if (key == "uram_blocks") {
            current->uram_blocks = parse_count(value, line_number, key);
        } else if (key == "external_ram_gb") {
            current->external_ram_gb = parse_gb(value, line_number);
        } else {
            throw ConfigError("platform file line " + std::to_string(line_number) + ": unknown key '" + std::string(key) + "'");
        }
    }
    close();
    return out;
}

unsigned bits_per_pixel(ReprKind kind, BasicLayout) { return code_bits(kind); }

unsigned bits_per_pixel(ReprKind kind, RollingLayout layout) {
    return code_bits(kind) + subwindow_index_bits(layout.slots);
}

ResourceEstimate estimate_blocks(const PipelineConfig& config, std::size_t fifo_capacity, unsigned fifo_element_bits) {
    validate_banks(config.geometry, config.banks);
    ResourceEstimate est;
    if (const auto* r = std::get_if<RollingWindow>(&config.trigger)) {
        if (r->step_us == 0 || r->span_us % r->step_us != 0) throw ConfigError("rolling window step K must divide N");
        est.cell_bits = bits_per_pixel(config.repr.kind, RollingLayout{r->slots()});
    } else {
        est.cell_bits = bits_per_pixel(config.repr.kind);
    }
    est.banks = config.banks;
    est.accumulator_bits = std::uint64_t{est.cell_bits} * config.geometry.pixel_count();
    est.fifo_bits = std::uint64_t{fifo_element_bits} * fifo_capacity;
    est.accumulator_blocks = std::uint64_t{config.banks} * BlockCount::from_bits(est.accumulator_bits / config.banks);
    est.fifo_blocks = BlockCount::from_bits(est.fifo_bits);
    est.pingpong_multiplier = config.buffering.kind == BufferKind::PingPong ? 2 : 1;
    est.bram_blocks = std::uint64_t{est.pingpong_multiplier} * est.accumulator_blocks + est.fifo_blocks;
    return est;
}

FitReport check_platform_fit(const ResourceEstimate& estimate, const PlatformProfile& platform) {
    FitReport report;
    const auto available = static_cast<std::int64_t>(platform.bram_blocks * 2);
    report.margin_halves = available - static_cast<std::int64_t>(estimate.bram_blocks.halves);
    report.feasible_bram = report.margin_halves >= 0;
    report.needs_uram_or_external =
        !report.feasible_bram && (platform.uram_blocks > 0 || platform.external_ram_gb > 0.0);
    report.uram_fallback = !report.feasible_bram && platform.uram_blocks > 0;
    return report;
}

}// namespace evframe
