#pragma once

#include <cmath>
#include <stdexcept>

#include "sqzlink/optics/laser.hpp"

namespace sqz {

// First-order recursive low-pass, the filter primitive of the whole loop
// (anti-alias sections, 39 kHz fast-path filter, DAC smoothing, actuator
// dynamics).
class OnePoleLowpass {
  public:
    OnePoleLowpass() = default;
    OnePoleLowpass(double cutoff_hz, double sample_rate_hz) {
        configure(cutoff_hz, sample_rate_hz);
    }

    void configure(double cutoff_hz, double sample_rate_hz) {
        if (!(cutoff_hz > 0.0) || !(sample_rate_hz > 0.0) ||
            cutoff_hz >= sample_rate_hz / 2.0)
            throw std::invalid_argument("lowpass: need 0 < cutoff < rate/2");
        alpha_ = 1.0 - std::exp(-kTwoPi * cutoff_hz / sample_rate_hz);
    }

    double step(double x) {
        state_ += alpha_ * (x - state_);
        return state_;
    }

    void reset(double value = 0.0) { state_ = value; }
    double value() const { return state_; }

  private:
    double alpha_ = 1.0;
    double state_ = 0.0;
};

}  // namespace sqz
