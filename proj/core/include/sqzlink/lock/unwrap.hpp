#pragma once

#include <cstdint>
#include <limits>

#include "sqzlink/lock/phase_word.hpp"

namespace sqz {

// Streaming phase unwrapper state. `wrapped` mirrors the last CORDIC output,
// `unwrapped` accumulates wrap-corrected increments in the same LSB.
struct PhaseSample {
    PhaseWord wrapped = 0;
    std::int32_t unwrapped = 0;  // accumulator, saturates instead of overflowing
    std::uint32_t wrap_events = 0;
    bool saturated = false;
};

// Wrap detection on the raw (word_bits+1)-bit increment: the two most
// significant bits decide. Pattern 01 means the raw difference ran past +pi
// (subtract one turn), pattern 10 means it ran past -pi (add one turn).
// Equivalent to folding the difference into the half-open ring [-pi, pi).
inline std::int32_t wrap_correction(std::int32_t raw_diff, int word_bits) {
    const std::int32_t turn = std::int32_t{1} << word_bits;
    const std::uint32_t u =
        static_cast<std::uint32_t>(raw_diff) & ((2u << word_bits) - 1u);
    const unsigned msb = (u >> word_bits) & 1u;
    const unsigned next = (u >> (word_bits - 1)) & 1u;
    if (msb == 0u && next == 1u) return -turn;
    if (msb == 1u && next == 0u) return turn;
    return 0;
}

inline PhaseSample unwrap_step(const PhaseSample& prev, PhaseWord wrapped_now) {
    PhaseSample out = prev;
    const std::int32_t raw = static_cast<std::int32_t>(wrapped_now) -
                             static_cast<std::int32_t>(prev.wrapped);
    const std::int32_t corr = wrap_correction(raw, kPhaseWordBits);
    if (corr != 0) ++out.wrap_events;
    const std::int64_t acc =
        static_cast<std::int64_t>(prev.unwrapped) + raw + corr;
    if (acc > std::numeric_limits<std::int32_t>::max()) {
        out.unwrapped = std::numeric_limits<std::int32_t>::max();
        out.saturated = true;
    } else if (acc < std::numeric_limits<std::int32_t>::min()) {
        out.unwrapped = std::numeric_limits<std::int32_t>::min();
        out.saturated = true;
    } else {
        out.unwrapped = static_cast<std::int32_t>(acc);
    }
    out.wrapped = wrapped_now;
    return out;
}

}  // namespace sqz
