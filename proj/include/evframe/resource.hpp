#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evframe/pipeline.hpp"
#include "evframe/representation.hpp"

namespace evframe {

/// Data bits in one block RAM (36 Kb primitive without parity).
inline constexpr std::uint64_t kBlockDataBits = 32768;

/// Block counts are allocated in half-block pieces; stored as an integer count of halves.
struct BlockCount {
    std::uint64_t halves = 0;

    double blocks() const noexcept { return static_cast<double>(halves) / 2.0; }
    static BlockCount from_bits(std::uint64_t bits) noexcept {
        // roundup_half(bits / kBlockDataBits)
        constexpr std::uint64_t half = kBlockDataBits / 2;
        return BlockCount{(bits + half - 1) / half};
    }

    friend BlockCount operator+(BlockCount a, BlockCount b) noexcept { return {a.halves + b.halves}; }
    friend BlockCount operator*(std::uint64_t k, BlockCount b) noexcept { return {k * b.halves}; }
    friend auto operator<=>(BlockCount, BlockCount) = default;
};

/// "29.5", "226"
std::string format_blocks(BlockCount count);

struct PlatformProfile {
    std::string name;
    std::uint64_t bram_blocks = 0;
    std::uint64_t uram_blocks = 0;
    double external_ram_gb = 0.0;
};

/// zcu104, kv260, zybo-z7-20.
const std::vector<PlatformProfile>& builtin_platforms();
std::optional<PlatformProfile> find_platform(std::string_view name, const std::vector<PlatformProfile>& platforms);

/// Stanzas of `key = value` lines separated by blank lines; `#` starts a comment.
/// Keys: name, bram_blocks, uram_blocks, external_ram_gb. Throws ConfigError.
std::vector<PlatformProfile> parse_platform_profiles(std::istream& source);

/// Accumulator layout variant; rolling adds a sub-window index to every cell.
struct BasicLayout {};
struct RollingLayout {
    std::uint64_t slots = 8;
};

unsigned bits_per_pixel(ReprKind kind, BasicLayout = {});
unsigned bits_per_pixel(ReprKind kind, RollingLayout layout);

struct ResourceEstimate {
    unsigned cell_bits = 0;
    std::uint32_t banks = 1;
    std::uint64_t accumulator_bits = 0;
    std::uint64_t fifo_bits = 0;
    BlockCount accumulator_blocks;
    BlockCount fifo_blocks;
    unsigned pingpong_multiplier = 1;
    BlockCount bram_blocks;
};

inline constexpr std::size_t kTableFifoCapacity = 512;
inline constexpr unsigned kFifoElementBits = 64;

/// accumulator = X * roundup_half(cell_bits*W*H / (X*32768)); fifo = roundup_half(capacity*bits/32768);
/// total = pingpong_multiplier * accumulator + fifo.
ResourceEstimate estimate_blocks(const PipelineConfig& config, std::size_t fifo_capacity = kTableFifoCapacity,
                                 unsigned fifo_element_bits = kFifoElementBits);

struct FitReport {
    bool feasible_bram = false;
    /// platform blocks minus required blocks, in half blocks; negative when it does not fit.
    std::int64_t margin_halves = 0;
    bool needs_uram_or_external = false;
    /// Infeasible in BRAM but the platform has Ultra RAM to fall back on.
    bool uram_fallback = false;

    double margin_blocks() const noexcept { return static_cast<double>(margin_halves) / 2.0; }
};

FitReport check_platform_fit(const ResourceEstimate& estimate, const PlatformProfile& platform);

}// namespace evframe
