#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "sqzlink/lock/cordic.hpp"
#include "sqzlink/lock/downmix.hpp"
#include "sqzlink/lock/filters.hpp"
#include "sqzlink/lock/phase_word.hpp"
#include "sqzlink/lock/pi_controller.hpp"
#include "sqzlink/lock/unwrap.hpp"

namespace sqz {

enum class LockState : std::uint8_t {
    CoarseTuning = 0,
    FrequencyLock = 1,
    FullLock = 2,
    LostLock = 3,
};

struct PiGains {
    double kp = 0.0;
    double ki = 0.0;
    double output_min = -1e18;
    double output_max = 1e18;
};

struct ActuatorConfig {
    double pzt_bandwidth_hz = 1e3;
    double pzt_range_rad_s = kTwoPi * 1e9;
    double eom_bandwidth_hz = 1e6;
    double eom_range_rad = 4.0 * kPi;
};

// First-order actuator responses with range clamping. The fast-path command
// additionally passes the 5 MHz post-DAC smoothing filter before the EOM.
class ActuatorEmulator {
  public:
    ActuatorEmulator(const ActuatorConfig& cfg, double rate_hz,
                     double dac_cutoff_hz)
        : cfg_(cfg),
          pzt_(cfg.pzt_bandwidth_hz, rate_hz),
          dac_(dac_cutoff_hz, rate_hz),
          eom_(cfg.eom_bandwidth_hz, rate_hz) {}

    void step(double pzt_cmd_rad_s, double eom_cmd_rad) {
        pzt_freq_ = pzt_.step(
            std::clamp(pzt_cmd_rad_s, -cfg_.pzt_range_rad_s, cfg_.pzt_range_rad_s));
        eom_phase_ = eom_.step(dac_.step(
            std::clamp(eom_cmd_rad, -cfg_.eom_range_rad, cfg_.eom_range_rad)));
    }

    double pzt_freq_rad_s() const { return pzt_freq_; }
    double eom_phase_rad() const { return eom_phase_; }

  private:
    ActuatorConfig cfg_;
    OnePoleLowpass pzt_, dac_, eom_;
    double pzt_freq_ = 0.0;
    double eom_phase_ = 0.0;
};

struct LockControllerConfig {
    double sample_rate_hz = 10e6;  // controller rate 1/T_s
    int cordic_iterations = 16;

    // Slow path: unwrapped phase (rad) -> PZT frequency (rad/s). Crossover
    // sits just below the 1 kHz PZT pole.
    PiGains slow{6000.0, 6.0e6, -kTwoPi * 1e9, kTwoPi * 1e9};
    // Medium path: q (ADC counts) -> PZT frequency (rad/s). Mostly
    // proportional; its integrator only trims the lock-point offset.
    PiGains medium{1.0, 250.0, -kTwoPi * 5e6, kTwoPi * 5e6};
    // Fast path: 39 kHz filtered q (ADC counts) -> EOM phase (rad).
    // Integrator-dominant; ki times the pilot amplitude in counts sets the
    // closed-loop bandwidth and with it the residual phase noise floor.
    PiGains fast{5.0e-4, 95.0, -4.0 * kPi, 4.0 * kPi};

    double fast_lowpass_cutoff_hz = 39e3;
    // Offload coupling: the EOM command (rad) is added to the medium-path
    // error in count equivalents, so the PZT slowly absorbs the fast
    // actuator's DC load and the EOM stays centred in its range. Without it
    // the two integrators share one error signal and the EOM command ramps
    // into its clamp.
    double eom_offload_counts_per_rad = 400.0;
    int phase_path_delay_samples = 5;  // pipeline latency of the CORDIC path

    // Lock-acquisition FSM.
    double capture_range_hz = 5e6;
    double freq_lock_threshold_hz = 1e3;
    // FullLock is engaged only once the unwrapped phase has converged, so the
    // medium/fast paths (which lock to the nearest 2*pi multiple) cannot
    // contend with the slow path and cause cycle slips at the handover.
    double full_lock_phase_threshold_rad = kPi / 2.0;
    int beat_window_samples = 4096;
    int settle_windows = 4;  // consecutive windows below threshold for FullLock
    double amplitude_threshold_counts = 200.0;
    bool coarse_tuning_enabled = true;
    double coarse_rate_hz_per_s = 1e9;
    double coarse_range_hz = 100e6;
};

struct ControllerOutput {
    double pzt_cmd_rad_s = 0.0;
    double eom_cmd_rad = 0.0;
    double temperature_cmd_rad_s = 0.0;
    LockState state = LockState::CoarseTuning;
    PhaseWord wrapped = 0;
    std::int32_t unwrapped = 0;
    std::uint32_t wrap_events = 0;
    double beat_estimate_hz = 0.0;
    bool dropout = false;  // (0,0) CORDIC input, previous phase held
};

// The digital feedback system: CORDIC phase extraction, streaming unwrap,
// three PI paths and the acquisition state machine. One instance is one
// strictly sequential loop; it holds no shared state.
class LockController {
  public:
    explicit LockController(const LockControllerConfig& cfg) : cfg_(cfg) {
        if (!(cfg.sample_rate_hz > 0.0))
            throw std::invalid_argument("controller: sample rate must be > 0");
        if (cfg.phase_path_delay_samples < 0)
            throw std::invalid_argument("controller: delay must be >= 0");
        ts_ = 1.0 / cfg.sample_rate_hz;
        slow_.configure(cfg.slow.kp, cfg.slow.ki, cfg.slow.output_min,
                        cfg.slow.output_max);
        medium_.configure(cfg.medium.kp, cfg.medium.ki, cfg.medium.output_min,
                          cfg.medium.output_max);
        fast_.configure(cfg.fast.kp, cfg.fast.ki, cfg.fast.output_min,
                        cfg.fast.output_max);
        fast_lpf_.configure(cfg.fast_lowpass_cutoff_hz, cfg.sample_rate_hz);
        delay_.assign(static_cast<std::size_t>(cfg.phase_path_delay_samples) + 1, 0);
        beat_ring_.assign(static_cast<std::size_t>(cfg.beat_window_samples), 0);
    }

    LockState state() const { return state_; }
    void force_state(LockState s) { state_ = s; }

    ControllerOutput tick(const IqSample& iq) {
        ControllerOutput out;

        const CordicResult angle =
            cordic_atan2(iq.q, iq.i, cfg_.cordic_iterations);
        if (angle.valid) {
            phase_ = unwrap_step(phase_, angle.angle);
        } else {
            out.dropout = true;  // hold previous phase
        }
        out.wrapped = phase_.wrapped;
        out.unwrapped = phase_.unwrapped;
        out.wrap_events = phase_.wrap_events;

        // Beat estimate: unwrapped slope over the ring-buffer window.
        beat_ring_[beat_pos_] = phase_.unwrapped;
        beat_pos_ = (beat_pos_ + 1) % beat_ring_.size();
        const std::int64_t span =
            static_cast<std::int64_t>(phase_.unwrapped) -
            static_cast<std::int64_t>(beat_ring_[beat_pos_]);
        const double window_s = static_cast<double>(beat_ring_.size()) * ts_;
        const double beat_hz =
            static_cast<double>(span) * kPhaseLsbRad / (kTwoPi * window_s);
        out.beat_estimate_hz = beat_hz;

        const double amp2 = static_cast<double>(iq.i) * iq.i +
                            static_cast<double>(iq.q) * iq.q;
        const bool in_capture =
            amp2 >= cfg_.amplitude_threshold_counts * cfg_.amplitude_threshold_counts &&
            std::abs(beat_hz) < cfg_.capture_range_hz;

        advance_fsm(in_capture, beat_hz);
        out.state = state_;

        // Delayed unwrapped phase feeds the slow path.
        delay_[delay_pos_] = phase_.unwrapped;
        delay_pos_ = (delay_pos_ + 1) % delay_.size();
        const double delayed_phase_rad = phase_acc_to_rad(delay_[delay_pos_]);

        switch (state_) {
            case LockState::CoarseTuning:
                out.temperature_cmd_rad_s = coarse_step();
                break;
            case LockState::FrequencyLock:
                out.pzt_cmd_rad_s = slow_.step(delayed_phase_rad, ts_);
                out.temperature_cmd_rad_s = temp_cmd_;
                break;
            case LockState::FullLock: {
                const double q_err = static_cast<double>(iq.q);
                const double slow_u = slow_.step(delayed_phase_rad, ts_);
                const double med_u = medium_.step(
                    q_err + cfg_.eom_offload_counts_per_rad *
                                fast_.last_output(),
                    ts_);
                out.pzt_cmd_rad_s = std::clamp(slow_u + med_u,
                                               cfg_.slow.output_min,
                                               cfg_.slow.output_max);
                out.eom_cmd_rad = fast_.step(fast_lpf_.step(q_err), ts_);
                out.temperature_cmd_rad_s = temp_cmd_;
                break;
            }
            case LockState::LostLock:
                // Actuators hold their last commands.
                out.pzt_cmd_rad_s = slow_.last_output() + medium_.last_output();
                out.eom_cmd_rad = fast_.last_output();
                out.temperature_cmd_rad_s = temp_cmd_;
                break;
        }
        ++tick_count_;
        return out;
    }

  private:
    void advance_fsm(bool in_capture, double beat_hz) {
        switch (state_) {
            case LockState::CoarseTuning:
                if (in_capture) state_ = LockState::FrequencyLock;
                break;
            case LockState::FrequencyLock:
                if (!in_capture) {
                    state_ = LockState::LostLock;
                    break;
                }
                if (std::abs(beat_hz) < cfg_.freq_lock_threshold_hz &&
                    std::abs(phase_acc_to_rad(phase_.unwrapped)) <
                        cfg_.full_lock_phase_threshold_rad) {
                    if (++settle_count_ >=
                        cfg_.settle_windows * cfg_.beat_window_samples)
                        state_ = LockState::FullLock;
                } else {
                    settle_count_ = 0;
                }
                break;
            case LockState::FullLock:
                if (!in_capture) state_ = LockState::LostLock;
                break;
            case LockState::LostLock:
                break;
        }
    }

    double coarse_step() {
        if (!cfg_.coarse_tuning_enabled) return temp_cmd_;
        temp_cmd_ += coarse_dir_ * kTwoPi * cfg_.coarse_rate_hz_per_s * ts_;
        if (std::abs(temp_cmd_) > kTwoPi * cfg_.coarse_range_hz)
            coarse_dir_ = -coarse_dir_;
        return temp_cmd_;
    }

    LockControllerConfig cfg_;
    double ts_ = 1e-7;
    PiController slow_, medium_, fast_;
    OnePoleLowpass fast_lpf_;
    PhaseSample phase_;
    std::vector<std::int32_t> delay_;
    std::size_t delay_pos_ = 0;
    std::vector<std::int32_t> beat_ring_;
    std::size_t beat_pos_ = 0;
    LockState state_ = LockState::CoarseTuning;
    long settle_count_ = 0;
    double temp_cmd_ = 0.0;
    double coarse_dir_ = 1.0;
    std::uint64_t tick_count_ = 0;
};

}  // namespace sqz
