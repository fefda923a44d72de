#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sqz {

// Residual pilot phase recovered from a raw receiver trace by digital IQ
// demodulation: mix to baseband at f_p, low-pass, atan2, unwrap, then remove
// the mean and best-fit linear ramp.
struct PhaseTrace {
    std::vector<double> samples_rad;  // detrended residual phase
    double sample_rate_hz = 0.0;
    double mean_offset_rad = 0.0;   // removed constant term
    double ramp_rad_per_s = 0.0;    // removed linear term (frequency offset)
    double pilot_amplitude = 0.0;   // recovered beat amplitude, trace units

    double sigma_rad() const;
};

struct PhaseEstimateConfig {
    double lowpass_cutoff_hz = 2e6;
    int decimation = 20;
    double min_pilot_amplitude = 1.0;  // SNR floor, trace units
};

PhaseTrace estimate_phase(const std::vector<float>& trace, double f_p_hz,
                          double sample_rate_hz,
                          const PhaseEstimateConfig& cfg = {});

PhaseTrace estimate_phase(const std::vector<double>& trace, double f_p_hz,
                          double sample_rate_hz,
                          const PhaseEstimateConfig& cfg = {});

struct InsufficientPilotPower : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace sqz
