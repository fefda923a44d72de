#pragma once

#include <cmath>
#include <stdexcept>

#include "sqzlink/rng.hpp"

namespace sqz {

// Single-mode fiber span: fixed attenuation per km plus a random-walk phase
// disturbance whose variance grows linearly in both time and length.
struct FiberChannel {
    double length_km = 0.0;
    double attenuation_db_per_km = 0.18;
    double phase_drift_rad2_per_s_per_km = 120.0;

    void validate() const {
        if (length_km < 0.0)
            throw std::invalid_argument("fiber: length must be >= 0");
        if (attenuation_db_per_km < 0.0)
            throw std::invalid_argument("fiber: attenuation must be >= 0");
        if (phase_drift_rad2_per_s_per_km < 0.0)
            throw std::invalid_argument("fiber: drift coefficient must be >= 0");
    }

    // 10^(-alpha*L/10), multiplicative under concatenation.
    double power_transmission() const {
        validate();
        return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
    }

    // One step of the accumulated phase disturbance.
    double drift_increment(double dt, Rng& rng) const {
        const double var = phase_drift_rad2_per_s_per_km * length_km * dt;
        return var > 0.0 ? std::sqrt(var) * rng.gaussian() : 0.0;
    }
};

struct FiberOutput {
    double power_w = 0.0;
    double added_phase_rad = 0.0;
};

inline FiberOutput fiber_transmit(const FiberChannel& channel, double power_w,
                                  double phase_state_rad, double dt, Rng& rng) {
    channel.validate();
    FiberOutput out;
    out.power_w = power_w * channel.power_transmission();
    out.added_phase_rad = phase_state_rad + channel.drift_increment(dt, rng);
    return out;
}

}  // namespace sqz
