#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "sqzlink/lock/phase_word.hpp"

namespace sqz {

struct CordicResult {
    PhaseWord angle = 0;
    bool valid = false;  // false on (0,0) input: measurement dropout
};

namespace detail {

// atan(2^-k) in units of 2^-32 turn.
constexpr std::array<std::int64_t, 32> make_cordic_table() {
    // Values precomputed as round(atan(2^-k) / (2*pi) * 2^32).
    return {536870912, 316933406, 167458907, 85004756, 42667331,
            21354465,  10679838,  5340245,   2670163,  1335087,
            667544,    333772,    166886,    83443,    41722,
            20861,     10430,     5215,      2608,     1304,
            652,       326,       163,       81,       41,
            20,        10,        5,         3,        1,
            1,         0};
}

constexpr auto kCordicTable = make_cordic_table();
constexpr std::int64_t kHalfTurn32 = std::int64_t{1} << 31;

}  // namespace detail

// Fixed-point vectoring-mode CORDIC atan2. Inputs are integer samples (ADC
// counts); they are widened internally with 16 guard bits so rounding in the
// x/y path stays below the angle resolution. Output is a 16-bit phase word
// in [-pi, pi); the x<0 half plane is pre-rotated by +-pi so the branch cut
// lands on atan2(0, -1) = -pi.
inline CordicResult cordic_atan2(std::int32_t q, std::int32_t i,
                                 int iterations) {
    if (iterations < 1 || iterations > 30)
        throw std::invalid_argument("cordic_atan2: iterations must be in [1,30]");
    if (i == 0 && q == 0) return {};

    std::int64_t x = static_cast<std::int64_t>(i) << 16;
    std::int64_t y = static_cast<std::int64_t>(q) << 16;
    std::int64_t acc = 0;
    if (x < 0) {
        acc = (y >= 0) ? detail::kHalfTurn32 : -detail::kHalfTurn32;
        x = -x;
        y = -y;
    }
    for (int k = 0; k < iterations && y != 0; ++k) {
        const std::int64_t xs = x >> k;
        const std::int64_t ys = y >> k;
        if (y > 0) {
            x += ys;
            y -= xs;
            acc += detail::kCordicTable[static_cast<std::size_t>(k)];
        } else {
            x -= ys;
            y += xs;
            acc -= detail::kCordicTable[static_cast<std::size_t>(k)];
        }
    }
    // Round the 2^-32-turn accumulator to the 16-bit phase ring; the +pi
    // boundary wraps to -pi through the masked cast.
    const std::int64_t rounded = (acc + (std::int64_t{1} << 15)) >> 16;
    const auto ticks = static_cast<std::uint16_t>(rounded & 0xffff);
    return {static_cast<PhaseWord>(ticks), true};
}

}  // namespace sqz
