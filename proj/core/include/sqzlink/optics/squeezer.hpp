#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace sqz {

// OPO squeezed-light source described by its quadrature variances at the
// measurement sideband frequency. No cavity field is simulated; the output
// is fully characterised by (V-, V+) in shot-noise units.
struct SqueezerModel {
    double pump_power_mw = 2.6;
    double threshold_power_mw = 5.12;
    double hwhm_bandwidth_hz = 66e6;       // f_sqz
    double efficiency = 0.64;              // eta, overall
    double measurement_frequency_hz = 12.2e6;
    double gain_perturbation = 0.0;        // crystal temperature drift knob

    // Normalized pump amplitude, in (0,1) below threshold.
    double pump_ratio() const {
        return std::sqrt(effective_pump_mw() / threshold_power_mw);
    }

    double effective_pump_mw() const {
        return pump_power_mw * (1.0 + gain_perturbation);
    }

    void validate() const {
        if (!(threshold_power_mw > 0.0))
            throw std::invalid_argument("squeezer: threshold power must be > 0");
        if (pump_power_mw < 0.0)
            throw std::invalid_argument("squeezer: pump power must be >= 0");
        if (!(efficiency > 0.0) || efficiency > 1.0)
            throw std::invalid_argument("squeezer: efficiency must be in (0,1]");
        if (!(hwhm_bandwidth_hz > 0.0))
            throw std::invalid_argument("squeezer: bandwidth must be > 0");
        if (measurement_frequency_hz < 0.0)
            throw std::invalid_argument("squeezer: measurement frequency must be >= 0");
    }
};

struct QuadratureVariances {
    double v_minus = 1.0;  // squeezed, shot-noise units
    double v_plus = 1.0;   // anti-squeezed
};

// Zero-phase-noise quadrature variances of the squeezed mode:
//   V+- = 1 +- 4*eta*F / ((1 -+ F)^2 + (f/f_sqz)^2)
// with F the normalized pump amplitude. Diverges (lasing) at F -> 1.
inline QuadratureVariances opo_variances(const SqueezerModel& m) {
    m.validate();
    if (m.effective_pump_mw() >= m.threshold_power_mw)
        throw std::domain_error("opo_variances: pump at/above lasing threshold");
    const double f_g = m.pump_ratio();
    const double r = m.measurement_frequency_hz / m.hwhm_bandwidth_hz;
    const double num = 4.0 * m.efficiency * f_g;
    QuadratureVariances v;
    v.v_minus = 1.0 - num / ((1.0 + f_g) * (1.0 + f_g) + r * r);
    v.v_plus = 1.0 + num / ((1.0 - f_g) * (1.0 - f_g) + r * r);
    return v;
}

// Gaussian phase-noise mixing of the two quadratures:
//   V+- = V+-0 (1 + e^{-2 sigma^2})/2 + V-+0 (1 - e^{-2 sigma^2})/2
// Exact for theta ~ N(0, sigma^2) since E[cos 2 theta] = e^{-2 sigma^2}.
inline QuadratureVariances apply_phase_noise(double v_minus0, double v_plus0,
                                             double sigma_rad) {
    if (sigma_rad < 0.0)
        throw std::invalid_argument("apply_phase_noise: sigma must be >= 0");
    const double c = std::exp(-2.0 * sigma_rad * sigma_rad);
    QuadratureVariances v;
    v.v_minus = v_minus0 * (1.0 + c) * 0.5 + v_plus0 * (1.0 - c) * 0.5;
    v.v_plus = v_plus0 * (1.0 + c) * 0.5 + v_minus0 * (1.0 - c) * 0.5;
    return v;
}

inline QuadratureVariances apply_phase_noise(const QuadratureVariances& v0,
                                             double sigma_rad) {
    return apply_phase_noise(v0.v_minus, v0.v_plus, sigma_rad);
}

}  // namespace sqz
