#include "sqzlink/pipeline.hpp"

#include <json.hpp>

#include "sqzlink/optics/laser.hpp"

namespace sqz {

using nlohmann::json;

namespace {

// Index of the first detector sample after acquisition plus settle margin;
// the transient before it sweeps through all quadratures and must not enter
// the variance estimate.
std::size_t analysis_start(const SimulationTrace& t, double settle_margin_s) {
    double start_s = settle_margin_s;
    if (t.lock_acquired) start_s += t.acquisition_time_s;
    auto first = static_cast<std::size_t>(start_s * t.sample_rate_hz);
    return first < t.homodyne.size() ? first : 0;
}

std::vector<float> tail(const std::vector<float>& v, std::size_t first) {
    return std::vector<float>(v.begin() + static_cast<std::ptrdiff_t>(first),
                              v.end());
}

BandVariance measure_band(const Scenario& s, const SimulationTrace& t,
                          std::size_t first) {
    return quadrature_variance(tail(t.homodyne, first), tail(t.vacuum, first),
                               tail(t.dark, first), t.sample_rate_hz,
                               s.analysis_band_low_hz, s.analysis_band_high_hz);
}

}  // namespace

PointResult run_point(const Scenario& scenario, const PipelineOptions& opts,
                      SimulationTrace* primary_trace_out) {
    PointResult result;
    result.pump_power_mw = scenario.squeezer.pump_power_mw;
    result.fiber_length_km = scenario.fiber.length_km;

    SimulationTrace trace = run_closed_loop(scenario);
    result.lock_acquired = trace.lock_acquired;
    result.acquisition_time_s = trace.acquisition_time_s;
    result.wrap_events_after_acquisition = trace.wrap_events_after_acquisition;
    result.overall_efficiency = trace.overall_efficiency;
    result.fiber_transmission = trace.fiber_transmission;
    result.v_minus0_model = trace.v_minus0;
    result.v_plus0_model = trace.v_plus0;

    const ResidualStats stats = residual_stats(trace, opts.settle_margin_s);
    result.sigma_residual_rad = stats.sigma_rad;
    result.sigma_controller_rad = stats.sigma_controller_rad;

    const std::size_t first = analysis_start(trace, opts.settle_margin_s);
    const BandVariance bv = measure_band(scenario, trace, first);
    result.v_minus_linear = bv.linear;
    result.v_minus_db = bv.db;

    if (opts.estimate_pilot_phase && scenario.pilot.power_at_source_w > 0.0) {
        try {
            const PhaseTrace pt = estimate_phase(
                tail(trace.homodyne, first),
                scenario.pilot.offset_frequency_hz, trace.sample_rate_hz);
            result.sigma_pilot_estimate_rad = pt.sigma_rad();
        } catch (const InsufficientPilotPower&) {
            result.sigma_pilot_estimate_rad.reset();
        }
    }

    if (opts.measure_anti_squeezing) {
        Scenario rotated = scenario;
        rotated.receiver.phase_set_rad += kPi / 2.0;
        SimulationTrace anti = run_closed_loop(rotated);
        const BandVariance bvp = measure_band(
            rotated, anti, analysis_start(anti, opts.settle_margin_s));
        result.v_plus_linear = bvp.linear;
        result.v_plus_db = bvp.db;
        result.lock_acquired = result.lock_acquired && anti.lock_acquired;
    }

    if (primary_trace_out) *primary_trace_out = std::move(trace);
    return result;
}

PointResult run_point(const Scenario& scenario, const PipelineOptions& opts) {
    return run_point(scenario, opts, nullptr);
}

std::string PointResult::to_json_text(const Scenario& scenario) const {
    json j;
    j["schema_version"] = scenario.schema_version;
    j["name"] = scenario.name;
    j["config_hash"] = scenario.config_hash();
    j["seed"] = scenario.seed;
    j["point"] = {{"pump_power_mw", pump_power_mw},
                  {"fiber_length_km", fiber_length_km}};
    j["lock"] = {{"acquired", lock_acquired},
                 {"acquisition_time_s", acquisition_time_s},
                 {"wrap_events_after_acquisition", wrap_events_after_acquisition}};
    j["phase_noise"] = {{"sigma_residual_rad", sigma_residual_rad},
                        {"sigma_controller_rad", sigma_controller_rad}};
    if (sigma_pilot_estimate_rad)
        j["phase_noise"]["sigma_pilot_estimate_rad"] = *sigma_pilot_estimate_rad;
    else
        j["phase_noise"]["sigma_pilot_estimate_rad"] = nullptr;
    j["variance"] = {{"v_minus_linear", v_minus_linear},
                     {"v_minus_db", v_minus_db},
                     {"v_plus_linear", v_plus_linear},
                     {"v_plus_db", v_plus_db}};
    j["optics"] = {{"overall_efficiency", overall_efficiency},
                   {"fiber_transmission", fiber_transmission},
                   {"v_minus0_model", v_minus0_model},
                   {"v_plus0_model", v_plus0_model}};
    return j.dump(2) + "\n";
}

}  // namespace sqz
