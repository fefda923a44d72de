#include "sqzlink/analysis/band_variance.hpp"

#include <cmath>

namespace sqz {

BandVariance quadrature_variance(const std::vector<float>& hd_trace,
                                 const std::vector<float>& vacuum_trace,
                                 const std::vector<float>& dark_trace,
                                 double sample_rate_hz, double band_low_hz,
                                 double band_high_hz,
                                 std::size_t segment_length) {
    if (!(band_high_hz > band_low_hz) || band_low_hz < 0.0)
        throw std::invalid_argument("quadrature_variance: bad band limits");
    const Psd hd = welch_psd(hd_trace, sample_rate_hz, segment_length);
    const Psd vac = welch_psd(vacuum_trace, sample_rate_hz, segment_length);
    double hd_power = hd.band_power(band_low_hz, band_high_hz);
    double vac_power = vac.band_power(band_low_hz, band_high_hz);
    if (!dark_trace.empty()) {
        const Psd dark = welch_psd(dark_trace, sample_rate_hz, segment_length);
        const double dark_power = dark.band_power(band_low_hz, band_high_hz);
        if (vac_power <= dark_power)
            throw CalibrationError(
                "quadrature_variance: vacuum variance at or below the "
                "electronic-noise floor");
        hd_power -= dark_power;
        vac_power -= dark_power;
    }
    if (!(vac_power > 0.0))
        throw CalibrationError("quadrature_variance: empty vacuum band");
    BandVariance out;
    out.linear = hd_power / vac_power;
    out.db = to_db(out.linear);
    return out;
}

}  // namespace sqz
