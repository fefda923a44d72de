#pragma once

#include <algorithm>

namespace sqz {

// Discrete PI section with output clamping and conditional-integration
// anti-windup: the integrator only advances while the output is inside its
// limits. A disabled controller holds its last output.
struct PiController {
    double kp = 0.0;
    double ki = 0.0;
    double output_min = -1e18;
    double output_max = 1e18;
    double integrator = 0.0;
    bool enabled = true;

    void configure(double kp_in, double ki_in, double out_min, double out_max) {
        kp = kp_in;
        ki = ki_in;
        output_min = out_min;
        output_max = out_max;
    }

    double step(double error, double dt) {
        if (!enabled) return last_output_;
        const double raw = kp * error + ki * integrator;
        const double clamped = std::clamp(raw, output_min, output_max);
        // Conditional integration: advance while inside the limits, or while
        // the error drives the output back toward them.
        const bool inward = (raw > output_max && ki * error < 0.0) ||
                            (raw < output_min && ki * error > 0.0);
        if (raw == clamped || inward) integrator += error * dt;
        last_output_ = clamped;
        return clamped;
    }

    void reset() {
        integrator = 0.0;
        last_output_ = 0.0;
    }

    double last_output() const { return last_output_; }

  private:
    double last_output_ = 0.0;
};

}  // namespace sqz
