#include "sqzlink/analysis/phase_estimate.hpp"

#include <cmath>
#include <stdexcept>

#include "sqzlink/lock/filters.hpp"

namespace sqz {

double PhaseTrace::sigma_rad() const {
    if (samples_rad.size() < 2) return 0.0;
    double sum = 0.0, sum2 = 0.0;
    for (double v : samples_rad) {
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(samples_rad.size());
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum2 / n - mean * mean));
}

PhaseTrace estimate_phase(const std::vector<double>& trace, double f_p_hz,
                          double sample_rate_hz,
                          const PhaseEstimateConfig& cfg) {
    if (!(sample_rate_hz > 2.0 * f_p_hz))
        throw std::invalid_argument("estimate_phase: sample rate must exceed 2*f_p");
    if (trace.size() < 10000)
        throw std::invalid_argument("estimate_phase: trace too short (< 1e4 samples)");
    if (cfg.decimation < 1)
        throw std::invalid_argument("estimate_phase: decimation must be >= 1");

    OnePoleLowpass lpf_i(cfg.lowpass_cutoff_hz, sample_rate_hz);
    OnePoleLowpass lpf_q(cfg.lowpass_cutoff_hz, sample_rate_hz);
    const double step = kTwoPi * f_p_hz / sample_rate_hz;
    double nco = 0.0;

    std::vector<double> phase;
    phase.reserve(trace.size() / cfg.decimation + 1);
    double amp_sum = 0.0;
    double prev = 0.0;
    double offset = 0.0;  // accumulated unwrap correction
    int dec = 0;
    bool first = true;
    // Skip the filter transient before keeping samples.
    const auto transient =
        static_cast<std::size_t>(4.0 * sample_rate_hz / (kTwoPi * cfg.lowpass_cutoff_hz));

    // Boxcar-average each decimation window rather than picking one sample:
    // the boxcar nulls land on multiples of the output rate, which is where
    // the 2*f_p mixing image aliases to.
    double acc_i = 0.0, acc_q = 0.0;
    for (std::size_t n = 0; n < trace.size(); ++n) {
        acc_i += lpf_i.step(trace[n] * std::cos(nco));
        acc_q += lpf_q.step(-trace[n] * std::sin(nco));
        nco += step;
        if (nco >= kPi) nco -= kTwoPi;
        if (++dec < cfg.decimation) continue;
        dec = 0;
        const double i = acc_i / cfg.decimation;
        const double q = acc_q / cfg.decimation;
        acc_i = acc_q = 0.0;
        if (n < transient) continue;
        const double wrapped = std::atan2(q, i);
        if (!first) {
            double d = wrapped - prev;
            if (d > kPi) offset -= kTwoPi;
            else if (d < -kPi) offset += kTwoPi;
        }
        first = false;
        prev = wrapped;
        phase.push_back(wrapped + offset);
        amp_sum += 2.0 * std::sqrt(i * i + q * q);
    }
    if (phase.size() < 16)
        throw std::invalid_argument("estimate_phase: trace too short after decimation");

    PhaseTrace out;
    out.sample_rate_hz = sample_rate_hz / cfg.decimation;
    out.pilot_amplitude = amp_sum / static_cast<double>(phase.size());
    if (out.pilot_amplitude < cfg.min_pilot_amplitude)
        throw InsufficientPilotPower(
            "estimate_phase: insufficient pilot power (recovered amplitude " +
            std::to_string(out.pilot_amplitude) + " below floor " +
            std::to_string(cfg.min_pilot_amplitude) + ")");

    // Least-squares line removal: residual = phase - (a + b t).
    const double n = static_cast<double>(phase.size());
    double st = 0.0, stt = 0.0, sp = 0.0, stp = 0.0;
    const double dt = 1.0 / out.sample_rate_hz;
    for (std::size_t k = 0; k < phase.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        st += t;
        stt += t * t;
        sp += phase[k];
        stp += t * phase[k];
    }
    const double denom = n * stt - st * st;
    const double b = denom != 0.0 ? (n * stp - st * sp) / denom : 0.0;
    const double a = (sp - b * st) / n;
    out.mean_offset_rad = a;
    out.ramp_rad_per_s = b;
    out.samples_rad.resize(phase.size());
    for (std::size_t k = 0; k < phase.size(); ++k)
        out.samples_rad[k] =
            phase[k] - a - b * static_cast<double>(k) * dt;
    return out;
}

PhaseTrace estimate_phase(const std::vector<float>& trace, double f_p_hz,
                          double sample_rate_hz,
                          const PhaseEstimateConfig& cfg) {
    std::vector<double> tmp(trace.begin(), trace.end());
    return estimate_phase(tmp, f_p_hz, sample_rate_hz, cfg);
}

}  // namespace sqz
