#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "sqzlink/lock/filters.hpp"

namespace sqz {

// Down-mixed error-signal sample pair at the controller rate, in ADC counts.
// Convention: for an input cos(Omega_p t + delta), i ~ cos(delta - phi_set)
// and q ~ +sin(delta - phi_set), so q -> 0 and i > 0 at the lock point.
struct IqSample {
    std::int32_t i = 0;
    std::int32_t q = 0;
    std::uint64_t sample_index = 0;  // controller-rate index n, t = n*T_s
};

struct DownmixerConfig {
    double pilot_frequency_hz = 40e6;
    double phase_set_rad = 0.0;
    double reference_amplitude = 1.0;  // A_r
    double input_rate_hz = 200e6;
    int decimation = 20;               // controller rate = input rate / decimation
    double lowpass_cutoff_hz = 5e6;
    int adc_bits = 14;
    double adc_full_scale = 100.0;
};

// Emulates the analog front end of the controller: multiplication by the
// electrical LO at Omega_p with phase phi_set, 5 MHz first-order low-pass,
// boxcar decimation to the controller rate and ADC quantization. The boxcar
// has transmission nulls at multiples of the controller rate, which removes
// the 2*Omega_p mixing image before it can alias onto DC.
class Downmixer {
  public:
    explicit Downmixer(const DownmixerConfig& cfg) : cfg_(cfg) {
        if (!(cfg.input_rate_hz >= 4.0 * cfg.pilot_frequency_hz))
            throw std::invalid_argument("downmix: input rate must be >= 4*f_p");
        if (cfg.decimation < 1)
            throw std::invalid_argument("downmix: decimation must be >= 1");
        if (cfg.adc_bits < 2 || cfg.adc_bits > 24)
            throw std::invalid_argument("downmix: adc bits out of range");
        lpf_i_.configure(cfg.lowpass_cutoff_hz, cfg.input_rate_hz);
        lpf_q_.configure(cfg.lowpass_cutoff_hz, cfg.input_rate_hz);
        phase_step_ = kTwoPi * cfg.pilot_frequency_hz / cfg.input_rate_hz;
        adc_lsb_ = cfg.adc_full_scale / static_cast<double>(1 << (cfg.adc_bits - 1));
    }

    double controller_rate_hz() const {
        return cfg_.input_rate_hz / cfg_.decimation;
    }

    // Feed one detector sample; yields an IqSample every `decimation` inputs.
    std::optional<IqSample> push(double sample) {
        const double ref = phase_ + cfg_.phase_set_rad;
        acc_i_ += lpf_i_.step(sample * cfg_.reference_amplitude * std::cos(ref));
        acc_q_ -= lpf_q_.step(sample * cfg_.reference_amplitude * std::sin(ref));
        phase_ += phase_step_;
        if (phase_ >= kPi) phase_ -= kTwoPi;
        if (++phase_count_ < cfg_.decimation) return std::nullopt;
        phase_count_ = 0;
        IqSample out;
        out.i = quantize(acc_i_ / cfg_.decimation);
        out.q = quantize(acc_q_ / cfg_.decimation);
        out.sample_index = index_++;
        acc_i_ = acc_q_ = 0.0;
        return out;
    }

  private:
    std::int32_t quantize(double v) const {
        const double clipped =
            std::clamp(v, -cfg_.adc_full_scale, cfg_.adc_full_scale - adc_lsb_);
        return static_cast<std::int32_t>(std::lround(clipped / adc_lsb_));
    }

    DownmixerConfig cfg_;
    OnePoleLowpass lpf_i_, lpf_q_;
    double phase_ = 0.0;
    double phase_step_ = 0.0;
    double adc_lsb_ = 1.0;
    double acc_i_ = 0.0, acc_q_ = 0.0;
    int phase_count_ = 0;
    std::uint64_t index_ = 0;
};

}  // namespace sqz
