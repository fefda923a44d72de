#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sqzlink/analysis/squeezing_fit.hpp"
#include "sqzlink/io/svg_plot.hpp"
#include "sqzlink/io/trace_io.hpp"
#include "sqzlink/pipeline.hpp"

namespace sqz::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Scenario load_or_exit(const CommonOptions& opt) {
    Scenario s = load_scenario(opt.scenario_path);
    if (opt.seed_override) s.seed = *opt.seed_override;
    return s;
}

void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

void make_result_dirs(const fs::path& out) {
    fs::create_directories(out / "traces");
    fs::create_directories(out / "analysis");
    fs::create_directories(out / "plots");
}

json point_json(const PointResult& r, bool failed,
                const std::string& error = "") {
    json j;
    j["pump_power_mw"] = r.pump_power_mw;
    j["fiber_length_km"] = r.fiber_length_km;
    j["failed"] = failed;
    if (!error.empty()) j["error"] = error;
    j["lock_acquired"] = r.lock_acquired;
    j["acquisition_time_s"] = r.acquisition_time_s;
    j["wrap_events_after_acquisition"] = r.wrap_events_after_acquisition;
    j["sigma_residual_rad"] = r.sigma_residual_rad;
    j["sigma_controller_rad"] = r.sigma_controller_rad;
    if (r.sigma_pilot_estimate_rad)
        j["sigma_pilot_estimate_rad"] = *r.sigma_pilot_estimate_rad;
    else
        j["sigma_pilot_estimate_rad"] = nullptr;
    j["v_minus_linear"] = r.v_minus_linear;
    j["v_minus_db"] = r.v_minus_db;
    j["v_plus_linear"] = r.v_plus_linear;
    j["v_plus_db"] = r.v_plus_db;
    j["overall_efficiency"] = r.overall_efficiency;
    j["fiber_transmission"] = r.fiber_transmission;
    j["v_minus0_model"] = r.v_minus0_model;
    j["v_plus0_model"] = r.v_plus0_model;
    return j;
}

json fit_json(const FitResult& f) {
    json j;
    j["efficiency"] = f.efficiency;
    j["phase_noise_std_rad"] = f.phase_noise_std_rad;
    j["residual_norm"] = f.residual_norm;
    j["iterations"] = f.iterations;
    j["converged"] = f.converged;
    j["weighting"] = "equal for V- and V+";
    j["parameter_covariance"] = {{f.parameter_covariance[0][0],
                                  f.parameter_covariance[0][1]},
                                 {f.parameter_covariance[1][0],
                                  f.parameter_covariance[1][1]}};
    return j;
}

std::string point_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "point_%03zu", index);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SweepPoint {
    Scenario scenario;
    PointResult result;
    bool done = false;
    bool failed = false;
    std::string error;
};

void write_sweep_csv(const fs::path& path,
                     const std::vector<SweepPoint>& points) {
    std::ostringstream csv;
    csv << "pump_power_mw,fiber_length_km,failed,lock_acquired,"
           "acquisition_time_s,sigma_residual_rad,sigma_controller_rad,"
           "v_minus_linear,v_minus_db,v_plus_linear,v_plus_db,"
           "overall_efficiency,fiber_transmission\n";
    csv.precision(10);
    for (const auto& p : points) {
        const auto& r = p.result;
        csv << r.pump_power_mw << ',' << r.fiber_length_km << ','
            << (p.failed ? 1 : 0) << ',' << (r.lock_acquired ? 1 : 0) << ','
            << r.acquisition_time_s << ',' << r.sigma_residual_rad << ','
            << r.sigma_controller_rad << ',' << r.v_minus_linear << ','
            << r.v_minus_db << ',' << r.v_plus_linear << ',' << r.v_plus_db
            << ',' << r.overall_efficiency << ',' << r.fiber_transmission
            << '\n';
    }
    write_atomic(path, csv.str());
}

void write_sweep_plots(const fs::path& plots,
                       const std::vector<SweepPoint>& points) {
    std::vector<double> pump, len, vm, vp, sig;
    for (const auto& p : points) {
        if (p.failed) continue;
        pump.push_back(p.result.pump_power_mw);
        len.push_back(p.result.fiber_length_km);
        vm.push_back(p.result.v_minus_db);
        vp.push_back(p.result.v_plus_db);
        sig.push_back(p.result.sigma_residual_rad * 1e3);
    }
    if (pump.empty()) return;

    const bool pump_varies =
        *std::max_element(pump.begin(), pump.end()) >
        *std::min_element(pump.begin(), pump.end());
    const bool len_varies = *std::max_element(len.begin(), len.end()) >
                            *std::min_element(len.begin(), len.end());

    if (pump_varies) {
        SvgPlot plot("Quadrature variance vs pump power", "pump power [mW]",
                     "variance [dB rel. shot noise]");
        plot.add_series("V- (squeezed)", pump, vm);
        plot.add_series("V+ (anti-squeezed)", pump, vp);
        plot.write((plots / "variance_vs_pump.svg").string());
    }
    if (len_varies) {
        SvgPlot splot("Residual phase noise vs fiber length",
                      "fiber length [km]", "sigma [mrad]");
        splot.add_series("sigma", len, sig);
        splot.write((plots / "sigma_vs_length.svg").string());

        SvgPlot vplot("Quadrature variance vs fiber length",
                      "fiber length [km]", "variance [dB rel. shot noise]");
        vplot.add_series("V- (squeezed)", len, vm);
        vplot.add_series("V+ (anti-squeezed)", len, vp);
        vplot.write((plots / "variance_vs_length.svg").string());
    }
}

int run_points(const Scenario& base, const CommonOptions& opt,
               std::vector<SweepPoint>& points, bool keep_traces) {
    const fs::path out(opt.out_dir);
    make_result_dirs(out);

    int jobs = opt.jobs > 0
                   ? opt.jobs
                   : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(points.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= points.size()) return;
            SweepPoint& p = points[k];
            try {
                PipelineOptions popt;
                if (keep_traces) {
                    SimulationTrace trace;
                    p.result = run_point(p.scenario, popt, &trace);
                    const fs::path tdir = out / "traces" / point_name(k);
                    fs::create_directories(tdir);
                    write_trace(tdir.string(), trace, p.scenario);
                    if (opt.csv)
                        export_trace_csv(
                            tdir.string(), trace,
                            (tdir / "controller_rate.csv").string());
                } else {
                    p.result = run_point(p.scenario, popt);
                }
                p.failed = !p.result.lock_acquired;
                if (p.failed) p.error = "lock not acquired";
            } catch (const std::exception& e) {
                p.result.pump_power_mw = p.scenario.squeezer.pump_power_mw;
                p.result.fiber_length_km = p.scenario.fiber.length_km;
                p.failed = true;
                p.error = e.what();
            }
            p.done = true;
            write_atomic(out / "analysis" / (point_name(k) + ".json"),
                         point_json(p.result, p.failed, p.error).dump(2) +
                             "\n");
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json summary;
    summary["schema_version"] = base.schema_version;
    summary["name"] = base.name;
    summary["config_hash"] = base.config_hash();
    summary["seed"] = base.seed;
    summary["points"] = json::array();
    for (const auto& p : points)
        summary["points"].push_back(point_json(p.result, p.failed, p.error));

    // Pump-axis model fit, grouped by fiber length.
    std::map<double, std::vector<VariancePoint>> by_length;
    for (const auto& p : points) {
        if (p.failed) continue;
        VariancePoint vp;
        vp.pump_power_mw = p.result.pump_power_mw;
        vp.fiber_length_km = p.result.fiber_length_km;
        vp.v_minus = p.result.v_minus_linear;
        vp.v_plus = p.result.v_plus_linear;
        vp.statistical_uncertainty = 1.0;
        by_length[p.result.fiber_length_km].push_back(vp);
    }
    summary["fits"] = json::array();
    for (const auto& [length, vps] : by_length) {
        if (vps.size() < 3) continue;
        FitFixedParams fixed;
        fixed.threshold_power_mw = base.squeezer.threshold_power_mw;
        fixed.measurement_frequency_hz = base.squeezer.measurement_frequency_hz;
        fixed.hwhm_bandwidth_hz = base.squeezer.hwhm_bandwidth_hz;
        try {
            json jf = fit_json(fit_squeezing_model(vps, fixed));
            jf["fiber_length_km"] = length;
            summary["fits"].push_back(jf);
        } catch (const FitError& e) {
            json jf = fit_json(e.best_iterate);
            jf["fiber_length_km"] = length;
            jf["error"] = e.what();
            summary["fits"].push_back(jf);
        }
    }

    // Length-axis trend fit.
    std::vector<double> lengths, sigmas;
    for (const auto& p : points) {
        if (p.failed) continue;
        lengths.push_back(p.result.fiber_length_km);
        sigmas.push_back(p.result.sigma_residual_rad);
    }
    std::vector<double> distinct = lengths;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (lengths.size() >= 3 && distinct.size() >= 3) {
        const DistanceFit df = phase_noise_vs_distance(lengths, sigmas);
        summary["distance_fit"] = {
            {"slope_rad_per_km", df.slope_rad_per_km},
            {"intercept_rad", df.intercept_rad},
            {"slope_stderr", df.slope_stderr},
            {"intercept_stderr", df.intercept_stderr}};
    }

    write_sweep_csv(out / "analysis" / "sweep.csv", points);
    write_sweep_plots(out / "plots", points);
    write_atomic(out / "summary.json", summary.dump(2) + "\n");

    bool any_ok = false, any_lock_failure = false;
    for (const auto& p : points) {
        if (!p.failed) any_ok = true;
        if (p.failed && p.error == "lock not acquired")
            any_lock_failure = true;
    }
    if (any_ok) return kExitOk;
    return any_lock_failure ? kExitLockFailure : kExitAnalysisFailure;
}

}  // namespace

int cmd_run(const CommonOptions& opt) {
    Scenario s;
    try {
        s = load_or_exit(opt);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    std::vector<SweepPoint> points(1);
    points[0].scenario = s;
    const int rc = run_points(s, opt, points, true);
    if (rc == kExitOk) {
        std::cout << "v_minus_db=" << points[0].result.v_minus_db
                  << " v_plus_db=" << points[0].result.v_plus_db
                  << " sigma_mrad=" << points[0].result.sigma_residual_rad * 1e3
                  << "\n";
    } else if (!points[0].error.empty()) {
        std::cerr << "run failed: " << points[0].error << "\n";
    }
    return rc;
}

int cmd_sweep(const CommonOptions& opt) {
    Scenario s;
    try {
        s = load_or_exit(opt);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    std::vector<double> pumps = s.sweep.pump_powers_mw;
    std::vector<double> lengths = s.sweep.fiber_lengths_km;
    const bool axes_empty = pumps.empty() && lengths.empty();
    if (pumps.empty()) pumps.push_back(s.squeezer.pump_power_mw);
    if (lengths.empty()) lengths.push_back(s.fiber.length_km);

    std::vector<SweepPoint> points;
    std::size_t index = 0;
    for (double length : lengths)
        for (double pump : pumps) {
            SweepPoint p;
            p.scenario = s;
            p.scenario.sweep = {};
            p.scenario.squeezer.pump_power_mw = pump;
            p.scenario.fiber.length_km = length;
            if (!axes_empty) p.scenario.seed = mix_seed(s.seed, index);
            points.push_back(std::move(p));
            ++index;
        }

    const int rc = run_points(s, opt, points, axes_empty);
    if (rc == kExitOk)
        std::cout << "sweep complete: " << points.size() << " points\n";
    return rc;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b,
                const std::string& out_dir) {
    json a, b;
    try {
        std::ifstream fa(fs::path(dir_a) / "summary.json");
        std::ifstream fb(fs::path(dir_b) / "summary.json");
        if (!fa || !fb)
            throw std::runtime_error("missing summary.json in input dir");
        a = json::parse(fa);
        b = json::parse(fb);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (a.value("schema_version", -1) != b.value("schema_version", -2)) {
        std::cerr << "config error: schema version mismatch\n";
        return kExitConfigError;
    }

    json report;
    report["schema_version"] = a["schema_version"];
    report["run_a"] = {{"name", a.value("name", "")},
                       {"config_hash", a.value("config_hash", 0ULL)}};
    report["run_b"] = {{"name", b.value("name", "")},
                       {"config_hash", b.value("config_hash", 0ULL)}};
    report["points"] = json::array();

    const auto& pa = a["points"];
    const auto& pb = b["points"];
    const std::size_t n = std::min(pa.size(), pb.size());
    std::vector<double> xs, sa, sb, va, vb;
    for (std::size_t k = 0; k < n; ++k) {
        json row;
        row["a"] = pa[k];
        row["b"] = pb[k];
        json diff;
        for (const char* field :
             {"sigma_residual_rad", "v_minus_db", "v_plus_db",
              "overall_efficiency", "acquisition_time_s"}) {
            if (pa[k].contains(field) && pb[k].contains(field) &&
                pa[k][field].is_number() && pb[k][field].is_number())
                diff[field] = pb[k][field].get<double>() -
                              pa[k][field].get<double>();
        }
        row["diff_b_minus_a"] = diff;
        report["points"].push_back(row);

        if (pa[k]["sigma_residual_rad"].is_number() &&
            pb[k]["sigma_residual_rad"].is_number()) {
            xs.push_back(pa[k].value("fiber_length_km", double(k)));
            sa.push_back(pa[k]["sigma_residual_rad"].get<double>() * 1e3);
            sb.push_back(pb[k]["sigma_residual_rad"].get<double>() * 1e3);
            va.push_back(pa[k].value("v_minus_db", 0.0));
            vb.push_back(pb[k].value("v_minus_db", 0.0));
        }
    }
    if (a.contains("fits")) report["fits_a"] = a["fits"];
    if (b.contains("fits")) report["fits_b"] = b["fits"];

    if (out_dir.empty()) {
        std::cout << report.dump(2) << "\n";
        return kExitOk;
    }
    fs::create_directories(fs::path(out_dir) / "plots");
    write_atomic(fs::path(out_dir) / "compare.json", report.dump(2) + "\n");
    if (!xs.empty()) {
        SvgPlot sp("Residual phase noise comparison", "fiber length [km]",
                   "sigma [mrad]");
        sp.add_series("run A", xs, sa);
        sp.add_series("run B", xs, sb);
        sp.write((fs::path(out_dir) / "plots" / "compare_sigma.svg").string());

        SvgPlot vp("Squeezed variance comparison", "fiber length [km]",
                   "V- [dB rel. shot noise]");
        vp.add_series("run A", xs, va);
        vp.add_series("run B", xs, vb);
        vp.write(
            (fs::path(out_dir) / "plots" / "compare_variance.svg").string());
    }
    return kExitOk;
}

int cmd_calibrate(const CommonOptions& opt) {
    Scenario s;
    try {
        s = load_or_exit(opt);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
    try {
        const SimulationTrace trace = run_closed_loop(s);
        const Psd vac = welch_psd(trace.vacuum, trace.sample_rate_hz);
        const Psd dark = welch_psd(trace.dark, trace.sample_rate_hz);
        const double pv =
            vac.band_power(s.analysis_band_low_hz, s.analysis_band_high_hz);
        const double pd =
            dark.band_power(s.analysis_band_low_hz, s.analysis_band_high_hz);
        if (pd <= 0.0 || pv <= pd)
            throw CalibrationError(
                "vacuum reference not above the electronic noise floor");

        json j;
        j["schema_version"] = s.schema_version;
        j["config_hash"] = s.config_hash();
        j["seed"] = s.seed;
        j["band_hz"] = {s.analysis_band_low_hz, s.analysis_band_high_hz};
        j["vacuum_band_power"] = pv;
        j["dark_band_power"] = pd;
        j["clearance_db"] = 10.0 * std::log10(pv / pd);
        j["shot_noise_band_power"] = pv - pd;

        if (opt.out_dir.empty()) {
            std::cout << j.dump(2) << "\n";
        } else {
            fs::create_directories(opt.out_dir);
            write_atomic(fs::path(opt.out_dir) / "calibration.json",
                         j.dump(2) + "\n");
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return kExitAnalysisFailure;
    }
}

int cmd_validate(const CommonOptions& opt) {
    try {
        const Scenario s = load_or_exit(opt);
        std::cout << "ok: " << s.name << " (config_hash=" << s.config_hash()
                  << ")\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }
}

}  // namespace sqz::cli
