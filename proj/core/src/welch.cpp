#include "sqzlink/analysis/welch.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sqz {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex g_fftw_plan_mutex;
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double Psd::band_power(double f_lo_hz, double f_hi_hz) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < freq_hz.size(); ++k)
        if (freq_hz[k] >= f_lo_hz && freq_hz[k] <= f_hi_hz) sum += power[k];
    return sum * df_hz;
}

double Psd::total_power() const {
    double sum = 0.0;
    for (double p : power) sum += p;
    return sum * df_hz;
}

Psd welch_psd(const std::vector<double>& samples, double sample_rate_hz,
              std::size_t segment_length, double overlap) {
    const std::size_t n = samples.size();
    if (segment_length < 8 || segment_length > n)
        throw std::invalid_argument("welch_psd: segment length out of range");
    if (overlap < 0.0 || overlap >= 1.0)
        throw std::invalid_argument("welch_psd: overlap must be in [0,1)");
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(segment_length * (1.0 - overlap)));

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> window(segment_length);
    double window_power = 0.0;
    for (std::size_t k = 0; k < segment_length; ++k) {
        window[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) /
                                         static_cast<double>(segment_length));
        window_power += window[k] * window[k];
    }

    const std::size_t n_bins = segment_length / 2 + 1;
    std::vector<double> acc(n_bins, 0.0);

    double* in;
    fftw_complex* out;
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        in = fftw_alloc_real(segment_length);
        out = fftw_alloc_complex(n_bins);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(segment_length), in, out,
                                    FFTW_ESTIMATE);
    }

    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + segment_length <= n; start += hop) {
        for (std::size_t k = 0; k < segment_length; ++k)
            in[k] = (samples[start + k] - mean) * window[k];
        fftw_execute(plan);
        for (std::size_t k = 0; k < n_bins; ++k)
            acc[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
        ++n_segments;
    }
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }

    Psd psd;
    psd.df_hz = sample_rate_hz / static_cast<double>(segment_length);
    psd.freq_hz.resize(n_bins);
    psd.power.resize(n_bins);
    const double norm =
        1.0 / (sample_rate_hz * window_power * static_cast<double>(n_segments));
    for (std::size_t k = 0; k < n_bins; ++k) {
        psd.freq_hz[k] = static_cast<double>(k) * psd.df_hz;
        double p = acc[k] * norm;
        if (k != 0 && k != n_bins - 1) p *= 2.0;  // one-sided
        psd.power[k] = p;
    }
    return psd;
}

Psd welch_psd(const std::vector<float>& samples, double sample_rate_hz,
              std::size_t segment_length, double overlap) {
    std::vector<double> tmp(samples.begin(), samples.end());
    return welch_psd(tmp, sample_rate_hz, segment_length, overlap);
}

}  // namespace sqz
