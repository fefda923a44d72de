#pragma once

#include <cmath>
#include <stdexcept>

#include "sqzlink/rng.hpp"

namespace sqz {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

// Instantaneous optical state of one laser. The optical carrier itself is
// never synthesised; only the phase/frequency offsets relative to the
// nominal carrier are tracked.
struct LaserState {
    double phase_rad = 0.0;
    double angular_frequency_offset_rad_s = 0.0;  // free-running offset
    double linewidth_hz = 0.0;                    // Lorentzian FWHM
    double pzt_freq_shift_rad_s = 0.0;            // actuator contribution
    double temperature_freq_shift_rad_s = 0.0;    // coarse tuning

    double total_frequency_rad_s() const {
        return angular_frequency_offset_rad_s + pzt_freq_shift_rad_s +
               temperature_freq_shift_rad_s;
    }

    bool finite() const {
        return std::isfinite(phase_rad) &&
               std::isfinite(angular_frequency_offset_rad_s) &&
               std::isfinite(linewidth_hz) &&
               std::isfinite(pzt_freq_shift_rad_s) &&
               std::isfinite(temperature_freq_shift_rad_s);
    }
};

// Advances the laser phase by one time step: deterministic rotation from the
// summed frequency terms plus a Wiener increment with variance
// 2*pi*linewidth*dt (Lorentzian line shape).
inline LaserState step_laser(const LaserState& state, double dt, Rng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_laser: dt must be > 0");
    if (!state.finite())
        throw std::invalid_argument("step_laser: non-finite laser state");
    LaserState next = state;
    next.phase_rad += state.total_frequency_rad_s() * dt;
    if (state.linewidth_hz > 0.0) {
        next.phase_rad +=
            std::sqrt(kTwoPi * state.linewidth_hz * dt) * rng.gaussian();
    }
    return next;
}

}  // namespace sqz
