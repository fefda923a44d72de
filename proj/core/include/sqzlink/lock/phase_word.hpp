#pragma once

#include <cmath>
#include <cstdint>

namespace sqz {

// Fixed-point phase convention used throughout the controller emulation.
//
// Wrapped phase: 16-bit two's complement word whose full scale is +-pi,
// i.e. one LSB = pi / 2^15 rad and the integer wraparound of the word is
// exactly the +-pi phase wrap. atan2(0, -1) maps to -pi (-32768).
// Unwrapped phase: 32-bit accumulator with the same LSB.
using PhaseWord = std::int16_t;

constexpr int kPhaseWordBits = 16;
constexpr double kPhaseLsbRad = 3.14159265358979323846 / 32768.0;
constexpr std::int32_t kPhaseTurn = 1 << kPhaseWordBits;  // 2*pi in LSBs

inline double phase_word_to_rad(PhaseWord w) {
    return static_cast<double>(w) * kPhaseLsbRad;
}

inline double phase_acc_to_rad(std::int32_t acc) {
    return static_cast<double>(acc) * kPhaseLsbRad;
}

// Wraps an arbitrary angle into the 16-bit ring [-pi, pi).
inline PhaseWord rad_to_phase_word(double rad) {
    double t = rad / kPhaseLsbRad;
    double w = std::fmod(t, static_cast<double>(kPhaseTurn));
    long long q = std::llround(w);
    q = ((q % kPhaseTurn) + kPhaseTurn + kPhaseTurn / 2) % kPhaseTurn -
        kPhaseTurn / 2;
    return static_cast<PhaseWord>(q);
}

}  // namespace sqz
