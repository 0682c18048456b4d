#pragma once

#include <cmath>
#include <cstdint>

namespace evframe {

/// The single real-to-integer rule used for codes and gray levels.
inline std::int64_t round_half_up(double v) noexcept { return static_cast<std::int64_t>(std::floor(v + 0.5)); }

}// namespace evframe
