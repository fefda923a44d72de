#pragma once

#include <cstdint>
#include <vector>

#include "sqzlink/io/scenario.hpp"

namespace sqz {

// Full time-series record of one closed-loop run plus the vacuum and dark
// calibration traces taken with the same receiver settings. Bitwise
// reproducible for a fixed (scenario, seed).
struct SimulationTrace {
    double sample_rate_hz = 0.0;      // detector-rate columns
    double controller_rate_hz = 0.0;  // controller-rate columns

    std::vector<float> homodyne;  // detector output, shot-noise units
    std::vector<float> vacuum;    // shot-noise calibration trace
    std::vector<float> dark;      // electronic-noise-only trace

    std::vector<float> i_counts;        // controller rate
    std::vector<float> q_counts;
    std::vector<float> wrapped_rad;
    std::vector<float> unwrapped_rad;
    std::vector<float> pzt_cmd_rad_s;
    std::vector<float> eom_cmd_rad;
    std::vector<std::uint8_t> fsm_state;
    std::vector<float> residual_phase_rad;  // true delta - phi_set

    bool lock_acquired = false;
    double acquisition_time_s = -1.0;
    std::uint32_t wrap_events_total = 0;
    std::uint32_t wrap_events_after_acquisition = 0;

    // Effective optical parameters of the run.
    double overall_efficiency = 0.0;
    double fiber_transmission = 0.0;
    double v_minus0 = 1.0;
    double v_plus0 = 1.0;
};

// Runs the composed system (lasers, fiber, squeezer statistics, homodyne
// front end, down-mixer, controller, actuators) at the detector sample rate
// for `duration_s`. A lock that is never acquired is reported through the
// trace flags, not an exception.
SimulationTrace run_closed_loop(const Scenario& scenario, double duration_s,
                                std::uint64_t seed);

inline SimulationTrace run_closed_loop(const Scenario& scenario) {
    return run_closed_loop(scenario, scenario.duration_s, scenario.seed);
}

// Residual-phase statistics over the post-acquisition part of the trace
// (a settle margin is skipped after FullLock is reached).
struct ResidualStats {
    double sigma_rad = 0.0;        // std of the true residual phase
    double mean_offset_rad = 0.0;  // lock-point offset, 2*pi multiples removed
    double sigma_controller_rad = 0.0;  // std of the controller's own estimate
    std::size_t samples = 0;
};

ResidualStats residual_stats(const SimulationTrace& trace,
                             double settle_margin_s = 2e-3);

}  // namespace sqz
