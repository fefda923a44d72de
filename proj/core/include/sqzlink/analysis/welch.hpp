#pragma once

#include <cstddef>
#include <vector>

namespace sqz {

struct Psd {
    std::vector<double> freq_hz;
    std::vector<double> power;  // one-sided density, units^2 / Hz
    double df_hz = 0.0;

    // Integral over [f_lo, f_hi]; with full range this recovers the trace
    // variance up to the window correction.
    double band_power(double f_lo_hz, double f_hi_hz) const;
    double total_power() const;
};

// Welch estimate with Hann window, mean removal per segment and the window
// power correction that keeps Parseval consistency.
Psd welch_psd(const std::vector<double>& samples, double sample_rate_hz,
              std::size_t segment_length = 16384, double overlap = 0.5);

Psd welch_psd(const std::vector<float>& samples, double sample_rate_hz,
              std::size_t segment_length = 16384, double overlap = 0.5);

}  // namespace sqz
