#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sqzlink/optics/squeezer.hpp"
#include "sqzlink/rng.hpp"

namespace sqz {

struct PilotTone {
    double offset_frequency_hz = 40e6;  // f_p
    double power_at_source_w = 5e-6;

    void validate() const {
        if (!(offset_frequency_hz > 0.0))
            throw std::invalid_argument("pilot: offset frequency must be > 0");
        if (power_at_source_w < 0.0)
            throw std::invalid_argument("pilot: power must be >= 0");
    }
};

// Balanced receiver. All output samples are expressed in shot-noise units:
// a vacuum input produces unit-variance white Gaussian samples, so the
// shot-noise calibration trace divides out to 1 by construction only in
// expectation, not per run.
struct HomodyneReceiver {
    double lo_power_w = 4e-3;
    double detection_efficiency = 1.0;  // folded into the scenario's eta
    double electronic_noise_clearance_db = 15.0;
    double sample_rate_hz = 200e6;
    double phase_set_rad = 0.0;
    double front_end_gain = 3.5e5;  // shot-noise units per W of sqrt(Pp*PLO)
    double full_scale = 1e4;        // saturation clip

    void validate() const {
        if (!(lo_power_w >= 0.0))
            throw std::invalid_argument("receiver: LO power must be >= 0");
        if (!(sample_rate_hz > 0.0))
            throw std::invalid_argument("receiver: sample rate must be > 0");
        if (!(front_end_gain > 0.0))
            throw std::invalid_argument("receiver: gain must be > 0");
        if (!(full_scale > 0.0))
            throw std::invalid_argument("receiver: full scale must be > 0");
    }

    double electronic_noise_std() const {
        return std::pow(10.0, -electronic_noise_clearance_db / 20.0);
    }

    // Beat amplitude of the pilot/LO interference at the detector output.
    double pilot_beat_amplitude(double pilot_power_w) const {
        return front_end_gain * std::sqrt(pilot_power_w * lo_power_w);
    }

    // One detector output sample.
    //   pilot_phase_rad: full argument of the pilot/LO beat, Omega_p*t + delta(t)
    //   quad_angle_rad:  instantaneous measured quadrature angle theta(t)
    //   v:               zero-phase-noise quadrature variances of the signal mode
    // The squeezed mode contributes a Gaussian sample of variance
    // V- cos^2(theta) + V+ sin^2(theta); vacuum corresponds to v = (1,1).
    double sample(double pilot_power_w, double pilot_phase_rad,
                  double quad_angle_rad, const QuadratureVariances& v,
                  Rng& rng) const {
        const double amp = pilot_beat_amplitude(pilot_power_w);
        const double c = std::cos(quad_angle_rad);
        const double s = std::sin(quad_angle_rad);
        const double var = v.v_minus * c * c + v.v_plus * s * s;
        double out = amp * std::cos(pilot_phase_rad) +
                     std::sqrt(var) * rng.gaussian() +
                     electronic_noise_std() * rng.gaussian();
        return std::clamp(out, -full_scale, full_scale);
    }
};

}  // namespace sqz
