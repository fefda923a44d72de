#include "sqzlink/lock/loop.hpp"

#include <cmath>

#include "sqzlink/optics/laser.hpp"
#include "sqzlink/rng.hpp"

namespace sqz {

namespace {

// Independent random streams derived from the scenario seed.
enum Stream : std::uint64_t {
    kSignalLaser = 0,
    kLoLaser = 1,
    kMainFiber = 2,
    kLoFiber = 3,
    kDetection = 4,
    kVacuum = 5,
    kDark = 6,
};

}  // namespace

SimulationTrace run_closed_loop(const Scenario& scenario, double duration_s,
                                std::uint64_t seed) {
    scenario.validate();
    if (!(duration_s > 0.0))
        throw std::invalid_argument("run_closed_loop: duration must be > 0");

    const double fs = scenario.receiver.sample_rate_hz;
    const double dt = 1.0 / fs;
    const auto n_samples = static_cast<std::size_t>(duration_s * fs);

    Rng rng_sig(seed, kSignalLaser);
    Rng rng_lo(seed, kLoLaser);
    Rng rng_fiber(seed, kMainFiber);
    Rng rng_lo_fiber(seed, kLoFiber);
    Rng rng_det(seed, kDetection);
    Rng rng_vac(seed, kVacuum);
    Rng rng_dark(seed, kDark);

    SimulationTrace trace;
    trace.sample_rate_hz = fs;
    trace.controller_rate_hz = scenario.controller.sample_rate_hz;
    trace.fiber_transmission = scenario.fiber.power_transmission();
    trace.overall_efficiency = scenario.squeezer.efficiency *
                               scenario.receiver.detection_efficiency *
                               trace.fiber_transmission;

    // Squeezed-mode statistics after all losses.
    SqueezerModel effective = scenario.squeezer;
    effective.efficiency = trace.overall_efficiency;
    const QuadratureVariances v0 = scenario.squeezer.pump_power_mw > 0.0
                                       ? opo_variances(effective)
                                       : QuadratureVariances{};
    trace.v_minus0 = v0.v_minus;
    trace.v_plus0 = v0.v_plus;

    const double pilot_power_w =
        scenario.pilot.power_at_source_w * trace.fiber_transmission;

    LaserState sig;
    sig.linewidth_hz = scenario.lasers.signal_linewidth_hz;
    LaserState lo;
    lo.linewidth_hz = scenario.lasers.lo_linewidth_hz;
    if (!scenario.regular_lo)
        lo.angular_frequency_offset_rad_s =
            kTwoPi * scenario.lasers.initial_frequency_offset_hz;

    FiberChannel lo_fiber = scenario.fiber;
    lo_fiber.length_km = scenario.regular_lo_fiber_km;

    Downmixer downmixer(scenario.downmixer_config());
    LockController controller(scenario.controller);
    if (scenario.start_in_full_lock) controller.force_state(LockState::FullLock);
    // The analog DAC smoothing filter is emulated at the controller rate, so
    // its cutoff is capped below the emulation Nyquist.
    const double dac_cutoff_hz =
        std::min(scenario.antialias_cutoff_hz,
                 0.4 * scenario.controller.sample_rate_hz);
    ActuatorEmulator actuators(scenario.actuators,
                               scenario.controller.sample_rate_hz,
                               dac_cutoff_hz);

    const std::size_t n_ctrl =
        n_samples / static_cast<std::size_t>(downmixer.controller_rate_hz() > 0
                                                 ? fs / downmixer.controller_rate_hz()
                                                 : 1) + 1;
    trace.homodyne.reserve(n_samples);
    trace.vacuum.reserve(n_samples);
    trace.dark.reserve(n_samples);
    trace.i_counts.reserve(n_ctrl);
    trace.q_counts.reserve(n_ctrl);
    trace.wrapped_rad.reserve(n_ctrl);
    trace.unwrapped_rad.reserve(n_ctrl);
    trace.pzt_cmd_rad_s.reserve(n_ctrl);
    trace.eom_cmd_rad.reserve(n_ctrl);
    trace.fsm_state.reserve(n_ctrl);
    trace.residual_phase_rad.reserve(n_ctrl);

    const double elec_std = scenario.receiver.electronic_noise_std();
    const double ts_ctrl = 1.0 / scenario.controller.sample_rate_hz;

    double drift_main = 0.0;
    double drift_lo = 0.0;
    double lo_ctrl_phase = 0.0;  // actuator-driven part of the LO phase
    double pilot_phase = 0.0;
    const double pilot_step = kTwoPi * scenario.pilot.offset_frequency_hz * dt;
    double pzt_freq = 0.0;
    double eom_phase = 0.0;
    double temp_freq = 0.0;
    std::uint32_t wrap_events_at_acquisition = 0;

    for (std::size_t n = 0; n < n_samples; ++n) {
        sig = step_laser(sig, dt, rng_sig);
        drift_main += scenario.fiber.drift_increment(dt, rng_fiber);
        double lo_free_phase;
        if (scenario.regular_lo) {
            drift_lo += lo_fiber.drift_increment(dt, rng_lo_fiber);
            lo_free_phase = sig.phase_rad + drift_lo;
        } else {
            lo = step_laser(lo, dt, rng_lo);
            lo_free_phase = lo.phase_rad;
        }
        lo_ctrl_phase += (pzt_freq + temp_freq) * dt;

        const double delta =
            sig.phase_rad + drift_main - lo_free_phase - lo_ctrl_phase - eom_phase;

        const double hd = scenario.receiver.sample(
            pilot_power_w, pilot_phase + delta, delta, v0, rng_det);
        trace.homodyne.push_back(static_cast<float>(hd));
        trace.vacuum.push_back(
            static_cast<float>(rng_vac.gaussian() + elec_std * rng_vac.gaussian()));
        trace.dark.push_back(static_cast<float>(elec_std * rng_dark.gaussian()));

        pilot_phase += pilot_step;
        if (pilot_phase >= kPi) pilot_phase -= kTwoPi;

        if (auto iq = downmixer.push(hd)) {
            trace.i_counts.push_back(static_cast<float>(iq->i));
            trace.q_counts.push_back(static_cast<float>(iq->q));
            trace.residual_phase_rad.push_back(
                static_cast<float>(delta - scenario.receiver.phase_set_rad));
            if (scenario.controller_enabled) {
                const ControllerOutput out = controller.tick(*iq);
                actuators.step(out.pzt_cmd_rad_s, out.eom_cmd_rad);
                pzt_freq = actuators.pzt_freq_rad_s();
                eom_phase = actuators.eom_phase_rad();
                temp_freq = out.temperature_cmd_rad_s;
                trace.wrapped_rad.push_back(
                    static_cast<float>(phase_word_to_rad(out.wrapped)));
                trace.unwrapped_rad.push_back(
                    static_cast<float>(phase_acc_to_rad(out.unwrapped)));
                trace.pzt_cmd_rad_s.push_back(static_cast<float>(out.pzt_cmd_rad_s));
                trace.eom_cmd_rad.push_back(static_cast<float>(out.eom_cmd_rad));
                trace.fsm_state.push_back(static_cast<std::uint8_t>(out.state));
                trace.wrap_events_total = out.wrap_events;
                if (!trace.lock_acquired && out.state == LockState::FullLock) {
                    trace.lock_acquired = true;
                    trace.acquisition_time_s =
                        static_cast<double>(iq->sample_index) * ts_ctrl;
                    wrap_events_at_acquisition = out.wrap_events;
                }
            } else {
                trace.wrapped_rad.push_back(0.0f);
                trace.unwrapped_rad.push_back(0.0f);
                trace.pzt_cmd_rad_s.push_back(0.0f);
                trace.eom_cmd_rad.push_back(0.0f);
                trace.fsm_state.push_back(
                    static_cast<std::uint8_t>(LockState::CoarseTuning));
            }
        }
    }
    if (trace.lock_acquired)
        trace.wrap_events_after_acquisition =
            trace.wrap_events_total - wrap_events_at_acquisition;
    return trace;
}

ResidualStats residual_stats(const SimulationTrace& trace,
                             double settle_margin_s) {
    ResidualStats stats;
    const auto& r = trace.residual_phase_rad;
    if (r.empty()) return stats;
    double start_s = settle_margin_s;
    if (trace.lock_acquired) start_s += trace.acquisition_time_s;
    auto first = static_cast<std::size_t>(start_s * trace.controller_rate_hz);
    if (first >= r.size()) first = 0;

    // Remove the whole-turn part of the lock point; slips inside the window
    // then show up as genuine 2*pi excursions in the statistics.
    const double turns = std::round(r[first] / kTwoPi);
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    double sum_ctrl = 0.0, sum2_ctrl = 0.0;
    for (std::size_t k = first; k < r.size(); ++k) {
        const double x = static_cast<double>(r[k]) - turns * kTwoPi;
        sum += x;
        sum2 += x * x;
        const double u = trace.unwrapped_rad[k];
        sum_ctrl += u;
        sum2_ctrl += u * u;
        ++count;
    }
    if (count < 2) return stats;
    const double n = static_cast<double>(count);
    const double mean = sum / n;
    const double mean_ctrl = sum_ctrl / n;
    stats.sigma_rad = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    stats.sigma_controller_rad =
        std::sqrt(std::max(0.0, sum2_ctrl / n - mean_ctrl * mean_ctrl));
    stats.mean_offset_rad = mean;
    stats.samples = count;
    return stats;
}

}  // namespace sqz
