#include "sqzlink/io/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace sqz {

using nlohmann::json;

namespace {

// Typed field access with JSON-pointer-style diagnostics.
class Section {
  public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ScenarioError(path_ + ": expected an object");
    }

    double number(const char* key, double fallback) {
        mark(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number())
            throw ScenarioError(path_ + "/" + key + ": expected a number");
        return v.get<double>();
    }

    bool boolean(const char* key, bool fallback) {
        mark(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean())
            throw ScenarioError(path_ + "/" + key + ": expected a boolean");
        return v.get<bool>();
    }

    std::string text(const char* key, const std::string& fallback) {
        mark(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string())
            throw ScenarioError(path_ + "/" + key + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) {
        mark(key);
        std::vector<double> out;
        if (!j_.contains(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array())
            throw ScenarioError(path_ + "/" + key + ": expected an array of numbers");
        for (const auto& e : v) {
            if (!e.is_number())
                throw ScenarioError(path_ + "/" + key + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    bool has(const char* key) {
        mark(key);
        return j_.contains(key);
    }

    const json& child(const char* key) {
        mark(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (seen_.find(it.key()) == seen_.end())
                throw ScenarioError(path_ + "/" + it.key() + ": unknown field");
    }

  private:
    void mark(const char* key) { seen_.insert(key); }
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

PiGains parse_gains(const json& j, const std::string& path, PiGains fallback) {
    Section s(j, path);
    PiGains g;
    g.kp = s.number("kp", fallback.kp);
    g.ki = s.number("ki", fallback.ki);
    g.output_min = s.number("output_min", fallback.output_min);
    g.output_max = s.number("output_max", fallback.output_max);
    s.finish();
    return g;
}

json dump_gains(const PiGains& g) {
    return json{{"kp", g.kp},
                {"ki", g.ki},
                {"output_min", g.output_min},
                {"output_max", g.output_max}};
}

}  // namespace

void Scenario::validate() const {
    if (schema_version != 1)
        throw ScenarioError("/schema_version: unsupported version");
    if (!seed_present) throw ScenarioError("/seed: mandatory, no implicit entropy");
    if (!(duration_s > 0.0)) throw ScenarioError("/duration_s: must be > 0");
    try {
        squeezer.validate();
        fiber.validate();
        pilot.validate();
        receiver.validate();
    } catch (const std::exception& e) {
        throw ScenarioError(std::string("config invariant: ") + e.what());
    }
    if (squeezer.effective_pump_mw() >= squeezer.threshold_power_mw)
        throw ScenarioError("/squeezer/pump_power_mw: at or above lasing threshold");
    if (lasers.signal_linewidth_hz < 0.0 || lasers.lo_linewidth_hz < 0.0)
        throw ScenarioError("/lasers: linewidths must be >= 0");
    if (!(receiver.sample_rate_hz >= 4.0 * pilot.offset_frequency_hz))
        throw ScenarioError("/receiver/sample_rate_hz: must be >= 4*f_p");
    if (!(controller.sample_rate_hz > 0.0) ||
        controller.sample_rate_hz > receiver.sample_rate_hz)
        throw ScenarioError("/controller/sample_rate_hz: must be in (0, detector rate]");
    const double ratio = receiver.sample_rate_hz / controller.sample_rate_hz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ScenarioError(
            "/controller/sample_rate_hz: detector rate must be an integer multiple");
    if (regular_lo_fiber_km < 0.0)
        throw ScenarioError("/regular_lo_fiber_km: must be >= 0");
    if (!(analysis_band_high_hz > analysis_band_low_hz) || analysis_band_low_hz < 0.0)
        throw ScenarioError("/analysis_band: bad band limits");
    for (double p : sweep.pump_powers_mw)
        if (!(p >= 0.0) || p >= squeezer.threshold_power_mw)
            throw ScenarioError("/sweep/pump_powers_mw: out of [0, threshold)");
    for (double l : sweep.fiber_lengths_km)
        if (l < 0.0) throw ScenarioError("/sweep/fiber_lengths_km: must be >= 0");
}

Scenario Scenario::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("JSON parse error: ") + e.what());
    }
    Scenario s;
    Section root(j, "");
    s.schema_version = static_cast<int>(root.number("schema_version", 1));
    s.name = root.text("name", "unnamed");
    if (root.has("seed")) {
        const auto& v = root.child("seed");
        if (!v.is_number_unsigned())
            throw ScenarioError("/seed: expected an unsigned integer");
        s.seed = v.get<std::uint64_t>();
        s.seed_present = true;
    }
    s.duration_s = root.number("duration_s", s.duration_s);

    if (root.has("squeezer")) {
        Section sec(root.child("squeezer"), "/squeezer");
        s.squeezer.pump_power_mw = sec.number("pump_power_mw", s.squeezer.pump_power_mw);
        s.squeezer.threshold_power_mw =
            sec.number("threshold_power_mw", s.squeezer.threshold_power_mw);
        s.squeezer.hwhm_bandwidth_hz =
            sec.number("hwhm_bandwidth_hz", s.squeezer.hwhm_bandwidth_hz);
        s.squeezer.efficiency = sec.number("efficiency", s.squeezer.efficiency);
        s.squeezer.measurement_frequency_hz =
            sec.number("measurement_frequency_hz", s.squeezer.measurement_frequency_hz);
        s.squeezer.gain_perturbation =
            sec.number("gain_perturbation", s.squeezer.gain_perturbation);
        sec.finish();
    }
    if (root.has("fiber")) {
        Section sec(root.child("fiber"), "/fiber");
        s.fiber.length_km = sec.number("length_km", s.fiber.length_km);
        s.fiber.attenuation_db_per_km =
            sec.number("attenuation_db_per_km", s.fiber.attenuation_db_per_km);
        s.fiber.phase_drift_rad2_per_s_per_km = sec.number(
            "phase_drift_rad2_per_s_per_km", s.fiber.phase_drift_rad2_per_s_per_km);
        sec.finish();
    }
    if (root.has("pilot")) {
        Section sec(root.child("pilot"), "/pilot");
        s.pilot.offset_frequency_hz =
            sec.number("offset_frequency_hz", s.pilot.offset_frequency_hz);
        s.pilot.power_at_source_w =
            sec.number("power_at_source_w", s.pilot.power_at_source_w);
        sec.finish();
    }
    if (root.has("receiver")) {
        Section sec(root.child("receiver"), "/receiver");
        s.receiver.lo_power_w = sec.number("lo_power_w", s.receiver.lo_power_w);
        s.receiver.detection_efficiency =
            sec.number("detection_efficiency", s.receiver.detection_efficiency);
        s.receiver.electronic_noise_clearance_db = sec.number(
            "electronic_noise_clearance_db", s.receiver.electronic_noise_clearance_db);
        s.receiver.sample_rate_hz =
            sec.number("sample_rate_hz", s.receiver.sample_rate_hz);
        s.receiver.phase_set_rad = sec.number("phase_set_rad", s.receiver.phase_set_rad);
        s.receiver.front_end_gain =
            sec.number("front_end_gain", s.receiver.front_end_gain);
        s.receiver.full_scale = sec.number("full_scale", s.receiver.full_scale);
        sec.finish();
    }
    if (root.has("lasers")) {
        Section sec(root.child("lasers"), "/lasers");
        s.lasers.signal_linewidth_hz =
            sec.number("signal_linewidth_hz", s.lasers.signal_linewidth_hz);
        s.lasers.lo_linewidth_hz =
            sec.number("lo_linewidth_hz", s.lasers.lo_linewidth_hz);
        s.lasers.initial_frequency_offset_hz = sec.number(
            "initial_frequency_offset_hz", s.lasers.initial_frequency_offset_hz);
        sec.finish();
    }
    if (root.has("controller")) {
        Section sec(root.child("controller"), "/controller");
        auto& c = s.controller;
        c.sample_rate_hz = sec.number("sample_rate_hz", c.sample_rate_hz);
        c.cordic_iterations =
            static_cast<int>(sec.number("cordic_iterations", c.cordic_iterations));
        if (sec.has("slow_path"))
            c.slow = parse_gains(sec.child("slow_path"), "/controller/slow_path", c.slow);
        if (sec.has("medium_path"))
            c.medium =
                parse_gains(sec.child("medium_path"), "/controller/medium_path", c.medium);
        if (sec.has("fast_path"))
            c.fast = parse_gains(sec.child("fast_path"), "/controller/fast_path", c.fast);
        c.fast_lowpass_cutoff_hz =
            sec.number("fast_lowpass_cutoff_hz", c.fast_lowpass_cutoff_hz);
        c.eom_offload_counts_per_rad = sec.number("eom_offload_counts_per_rad",
                                                  c.eom_offload_counts_per_rad);
        c.phase_path_delay_samples = static_cast<int>(
            sec.number("phase_path_delay_samples", c.phase_path_delay_samples));
        c.capture_range_hz = sec.number("capture_range_hz", c.capture_range_hz);
        c.freq_lock_threshold_hz =
            sec.number("freq_lock_threshold_hz", c.freq_lock_threshold_hz);
        c.full_lock_phase_threshold_rad = sec.number("full_lock_phase_threshold_rad",
                                                     c.full_lock_phase_threshold_rad);
        c.beat_window_samples =
            static_cast<int>(sec.number("beat_window_samples", c.beat_window_samples));
        c.settle_windows = static_cast<int>(sec.number("settle_windows", c.settle_windows));
        c.amplitude_threshold_counts =
            sec.number("amplitude_threshold_counts", c.amplitude_threshold_counts);
        c.coarse_tuning_enabled =
            sec.boolean("coarse_tuning_enabled", c.coarse_tuning_enabled);
        c.coarse_rate_hz_per_s = sec.number("coarse_rate_hz_per_s", c.coarse_rate_hz_per_s);
        c.coarse_range_hz = sec.number("coarse_range_hz", c.coarse_range_hz);
        sec.finish();
    }
    if (root.has("actuators")) {
        Section sec(root.child("actuators"), "/actuators");
        s.actuators.pzt_bandwidth_hz =
            sec.number("pzt_bandwidth_hz", s.actuators.pzt_bandwidth_hz);
        s.actuators.pzt_range_rad_s =
            sec.number("pzt_range_rad_s", s.actuators.pzt_range_rad_s);
        s.actuators.eom_bandwidth_hz =
            sec.number("eom_bandwidth_hz", s.actuators.eom_bandwidth_hz);
        s.actuators.eom_range_rad =
            sec.number("eom_range_rad", s.actuators.eom_range_rad);
        sec.finish();
    }
    s.adc_bits = static_cast<int>(root.number("adc_bits", s.adc_bits));
    s.adc_full_scale = root.number("adc_full_scale", s.adc_full_scale);
    s.reference_amplitude = root.number("reference_amplitude", s.reference_amplitude);
    s.antialias_cutoff_hz = root.number("antialias_cutoff_hz", s.antialias_cutoff_hz);
    s.controller_enabled = root.boolean("controller_enabled", s.controller_enabled);
    s.start_in_full_lock = root.boolean("start_in_full_lock", s.start_in_full_lock);
    s.regular_lo = root.boolean("regular_lo", s.regular_lo);
    s.regular_lo_fiber_km = root.number("regular_lo_fiber_km", s.regular_lo_fiber_km);
    s.analysis_band_low_hz = root.number("analysis_band_low_hz", s.analysis_band_low_hz);
    s.analysis_band_high_hz =
        root.number("analysis_band_high_hz", s.analysis_band_high_hz);
    if (root.has("sweep")) {
        Section sec(root.child("sweep"), "/sweep");
        s.sweep.pump_powers_mw = sec.numbers("pump_powers_mw");
        s.sweep.fiber_lengths_km = sec.numbers("fiber_lengths_km");
        sec.finish();
    }
    root.finish();
    s.validate();
    return s;
}

std::string Scenario::to_json_text() const {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = name;
    j["seed"] = seed;
    j["duration_s"] = duration_s;
    j["squeezer"] = {
        {"pump_power_mw", squeezer.pump_power_mw},
        {"threshold_power_mw", squeezer.threshold_power_mw},
        {"hwhm_bandwidth_hz", squeezer.hwhm_bandwidth_hz},
        {"efficiency", squeezer.efficiency},
        {"measurement_frequency_hz", squeezer.measurement_frequency_hz},
        {"gain_perturbation", squeezer.gain_perturbation}};
    j["fiber"] = {{"length_km", fiber.length_km},
                  {"attenuation_db_per_km", fiber.attenuation_db_per_km},
                  {"phase_drift_rad2_per_s_per_km", fiber.phase_drift_rad2_per_s_per_km}};
    j["pilot"] = {{"offset_frequency_hz", pilot.offset_frequency_hz},
                  {"power_at_source_w", pilot.power_at_source_w}};
    j["receiver"] = {{"lo_power_w", receiver.lo_power_w},
                     {"detection_efficiency", receiver.detection_efficiency},
                     {"electronic_noise_clearance_db", receiver.electronic_noise_clearance_db},
                     {"sample_rate_hz", receiver.sample_rate_hz},
                     {"phase_set_rad", receiver.phase_set_rad},
                     {"front_end_gain", receiver.front_end_gain},
                     {"full_scale", receiver.full_scale}};
    j["lasers"] = {{"signal_linewidth_hz", lasers.signal_linewidth_hz},
                   {"lo_linewidth_hz", lasers.lo_linewidth_hz},
                   {"initial_frequency_offset_hz", lasers.initial_frequency_offset_hz}};
    j["controller"] = {{"sample_rate_hz", controller.sample_rate_hz},
                       {"cordic_iterations", controller.cordic_iterations},
                       {"slow_path", dump_gains(controller.slow)},
                       {"medium_path", dump_gains(controller.medium)},
                       {"fast_path", dump_gains(controller.fast)},
                       {"fast_lowpass_cutoff_hz", controller.fast_lowpass_cutoff_hz},
                       {"eom_offload_counts_per_rad", controller.eom_offload_counts_per_rad},
                       {"phase_path_delay_samples", controller.phase_path_delay_samples},
                       {"capture_range_hz", controller.capture_range_hz},
                       {"freq_lock_threshold_hz", controller.freq_lock_threshold_hz},
                       {"full_lock_phase_threshold_rad", controller.full_lock_phase_threshold_rad},
                       {"beat_window_samples", controller.beat_window_samples},
                       {"settle_windows", controller.settle_windows},
                       {"amplitude_threshold_counts", controller.amplitude_threshold_counts},
                       {"coarse_tuning_enabled", controller.coarse_tuning_enabled},
                       {"coarse_rate_hz_per_s", controller.coarse_rate_hz_per_s},
                       {"coarse_range_hz", controller.coarse_range_hz}};
    j["actuators"] = {{"pzt_bandwidth_hz", actuators.pzt_bandwidth_hz},
                      {"pzt_range_rad_s", actuators.pzt_range_rad_s},
                      {"eom_bandwidth_hz", actuators.eom_bandwidth_hz},
                      {"eom_range_rad", actuators.eom_range_rad}};
    j["adc_bits"] = adc_bits;
    j["adc_full_scale"] = adc_full_scale;
    j["reference_amplitude"] = reference_amplitude;
    j["antialias_cutoff_hz"] = antialias_cutoff_hz;
    j["controller_enabled"] = controller_enabled;
    j["start_in_full_lock"] = start_in_full_lock;
    j["regular_lo"] = regular_lo;
    j["regular_lo_fiber_km"] = regular_lo_fiber_km;
    j["analysis_band_low_hz"] = analysis_band_low_hz;
    j["analysis_band_high_hz"] = analysis_band_high_hz;
    j["sweep"] = {{"pump_powers_mw", sweep.pump_powers_mw},
                  {"fiber_lengths_km", sweep.fiber_lengths_km}};
    return j.dump(2) + "\n";
}

std::uint64_t Scenario::config_hash() const {
    const std::string text = to_json_text();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return Scenario::from_json_text(buf.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write scenario file: " + path);
    out << s.to_json_text();
}

}  // namespace sqz
