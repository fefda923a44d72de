#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sqzlink/analysis/welch.hpp"

namespace sqz {

struct BandVariance {
    double linear = 1.0;  // shot-noise units
    double db = 0.0;
};

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Band-limited variance of the measurement trace relative to the vacuum
// (shot-noise) calibration trace, both corrected by the electronic-noise
// floor of the dark trace. Pass an empty dark trace to skip the correction.
BandVariance quadrature_variance(const std::vector<float>& hd_trace,
                                 const std::vector<float>& vacuum_trace,
                                 const std::vector<float>& dark_trace,
                                 double sample_rate_hz, double band_low_hz,
                                 double band_high_hz,
                                 std::size_t segment_length = 16384);

}  // namespace sqz
