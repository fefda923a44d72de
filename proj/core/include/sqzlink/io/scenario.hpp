#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqzlink/lock/controller.hpp"
#include "sqzlink/lock/downmix.hpp"
#include "sqzlink/optics/fiber.hpp"
#include "sqzlink/optics/homodyne.hpp"
#include "sqzlink/optics/squeezer.hpp"

namespace sqz {

struct LaserConfig {
    double signal_linewidth_hz = 100.0;
    double lo_linewidth_hz = 100.0;
    double initial_frequency_offset_hz = 100e3;  // LO minus signal
};

struct SweepAxes {
    std::vector<double> pump_powers_mw;
    std::vector<double> fiber_lengths_km;
};

// One complete experiment description. JSON field names carry explicit units
// (e.g. pump_power_mw); the seed is mandatory so no run ever picks up
// implicit entropy.
struct Scenario {
    int schema_version = 1;
    std::string name = "unnamed";
    std::uint64_t seed = 0;
    bool seed_present = false;
    double duration_s = 0.03;

    SqueezerModel squeezer;
    FiberChannel fiber;
    PilotTone pilot;
    HomodyneReceiver receiver;
    LaserConfig lasers;
    LockControllerConfig controller;
    ActuatorConfig actuators;

    int adc_bits = 14;
    double adc_full_scale = 100.0;
    double reference_amplitude = 1.0;  // A_r of the electrical LO
    double antialias_cutoff_hz = 5e6;

    bool controller_enabled = true;
    bool start_in_full_lock = false;

    // Regular-LO comparison mode: the LO shares the signal laser's phase
    // process and travels a constant-length service fiber instead.
    bool regular_lo = false;
    double regular_lo_fiber_km = 0.01;

    // Analysis band around the measurement frequency.
    double analysis_band_low_hz = 10.2e6;
    double analysis_band_high_hz = 14.2e6;

    SweepAxes sweep;

    DownmixerConfig downmixer_config() const {
        DownmixerConfig d;
        d.pilot_frequency_hz = pilot.offset_frequency_hz;
        d.phase_set_rad = receiver.phase_set_rad;
        d.reference_amplitude = reference_amplitude;
        d.input_rate_hz = receiver.sample_rate_hz;
        d.decimation = static_cast<int>(
            receiver.sample_rate_hz / controller.sample_rate_hz + 0.5);
        d.lowpass_cutoff_hz = antialias_cutoff_hz;
        d.adc_bits = adc_bits;
        d.adc_full_scale = adc_full_scale;
        return d;
    }

    void validate() const;

    // JSON round-trip; parse errors and invariant violations throw
    // ScenarioError with a field-level message.
    static Scenario from_json_text(const std::string& text);
    std::string to_json_text() const;

    // FNV-1a hash of the canonical serialization.
    std::uint64_t config_hash() const;
};

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace sqz
