#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqzlink/analysis/band_variance.hpp"
#include "sqzlink/analysis/phase_estimate.hpp"
#include "sqzlink/analysis/squeezing_fit.hpp"
#include "sqzlink/analysis/welch.hpp"
#include "sqzlink/lock/loop.hpp"
#include "sqzlink/optics/squeezer.hpp"
#include "sqzlink/rng.hpp"

using namespace sqz;

namespace {

std::vector<double> white_noise(std::size_t n, double std_dev,
                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = std_dev * rng.gaussian();
    return x;
}

std::vector<float> white_noise_f(std::size_t n, double std_dev,
                                 std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> x(n);
    for (auto& v : x) v = static_cast<float>(std_dev * rng.gaussian());
    return x;
}

VariancePoint model_point(double pump_mw, double eta, double sigma) {
    SqueezerModel m;
    m.pump_power_mw = pump_mw;
    m.efficiency = eta;
    const QuadratureVariances v = apply_phase_noise(opo_variances(m), sigma);
    VariancePoint p;
    p.pump_power_mw = pump_mw;
    p.v_minus = v.v_minus;
    p.v_plus = v.v_plus;
    return p;
}

}  // namespace

TEST_CASE("welch total power matches white-noise variance") {
    const std::size_t n = 1 << 20;
    const auto x = white_noise(n, 1.0, 101);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);

    const Psd psd = welch_psd(x, 10e6);
    CHECK(psd.total_power() == doctest::Approx(var).epsilon(0.03));
    CHECK(psd.band_power(0.0, 5e6) ==
          doctest::Approx(psd.total_power()).epsilon(1e-9));
}

TEST_CASE("welch recovers sinusoid power a^2/2") {
    const double fs = 10e6;
    const double f0 = 1e6;
    const double a = 3.0;
    const std::size_t n = 1 << 20;
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = a * std::sin(kTwoPi * f0 * static_cast<double>(k) / fs);
    const Psd psd = welch_psd(x, fs);
    // Hann leakage is confined to a few bins; integrate a narrow band.
    const double p = psd.band_power(f0 - 10.0 * psd.df_hz, f0 + 10.0 * psd.df_hz);
    CHECK(p == doctest::Approx(a * a / 2.0).epsilon(0.05));
}

TEST_CASE("welch shows 1/f^2 slope for a random walk") {
    const double fs = 10e6;
    const std::size_t n = 1 << 21;
    Rng rng(55);
    std::vector<double> x(n);
    double acc = 0.0;
    for (auto& v : x) {
        acc += 1e-3 * rng.gaussian();
        v = acc;
    }
    const Psd psd = welch_psd(x, fs);
    // Log-log regression over a band well above the segment resolution and
    // well below Nyquist.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double m = 0;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
        const double f = psd.freq_hz[k];
        if (f < 5e3 || f > 2e5) continue;
        const double lx = std::log10(f);
        const double ly = std::log10(psd.power[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        m += 1.0;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(10.0 * slope == doctest::Approx(-20.0).epsilon(0.05));
}

TEST_CASE("welch rejects degenerate segmentation") {
    const auto x = white_noise(1024, 1.0, 1);
    CHECK_THROWS_AS(welch_psd(x, 1e6, 0), std::invalid_argument);
    CHECK_THROWS_AS(welch_psd(x, 1e6, 4096), std::invalid_argument);
    CHECK_THROWS_AS(welch_psd(x, 1e6, 256, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(welch_psd(x, 1e6, 256, -0.1), std::invalid_argument);
}

TEST_CASE("estimate_phase recovers a constant offset") {
    const double fs = 200e6;
    const double fp = 40e6;
    const std::size_t n = 1 << 20;
    std::vector<float> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = static_cast<float>(
            50.0 * std::cos(kTwoPi * fp * static_cast<double>(k) / fs + 0.3));
    const PhaseTrace pt = estimate_phase(x, fp, fs);
    CHECK(pt.mean_offset_rad == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(pt.sigma_rad() < 1e-3);
    CHECK(pt.pilot_amplitude == doctest::Approx(50.0).epsilon(0.01));
    CHECK(std::abs(pt.ramp_rad_per_s) < 1.0);
}

TEST_CASE("estimate_phase recovers phase-modulation depth") {
    const double fs = 200e6;
    const double fp = 40e6;
    const double fm = 10e3;
    const double depth = 0.05;
    const std::size_t n = 1 << 21;
    std::vector<float> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fs;
        x[k] = static_cast<float>(
            50.0 * std::cos(kTwoPi * fp * t + 0.3 +
                            depth * std::sin(kTwoPi * fm * t)));
    }
    const PhaseTrace pt = estimate_phase(x, fp, fs);
    const double sigma2 = pt.sigma_rad() * pt.sigma_rad();
    CHECK(sigma2 == doctest::Approx(depth * depth / 2.0).epsilon(0.05));
}

TEST_CASE("estimate_phase detects a frequency ramp") {
    const double fs = 200e6;
    const double fp = 40e6;
    const double f_off = 2e3;  // slow beat riding on the pilot
    const std::size_t n = 1 << 20;
    std::vector<float> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fs;
        x[k] = static_cast<float>(
            50.0 * std::cos(kTwoPi * (fp + f_off) * t));
    }
    const PhaseTrace pt = estimate_phase(x, fp, fs);
    CHECK(pt.ramp_rad_per_s ==
          doctest::Approx(kTwoPi * f_off).epsilon(0.01));
    CHECK(pt.sigma_rad() < 1e-2);
}

TEST_CASE("estimate_phase refuses a buried pilot") {
    const double fs = 200e6;
    const double fp = 40e6;
    const std::size_t n = 1 << 18;
    Rng rng(9);
    std::vector<float> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = static_cast<float>(
            0.05 * std::cos(kTwoPi * fp * static_cast<double>(k) / fs) +
            rng.gaussian());
    CHECK_THROWS_AS(estimate_phase(x, fp, fs), InsufficientPilotPower);
    CHECK_THROWS_AS(estimate_phase(x, 150e6, fs), std::invalid_argument);
}

TEST_CASE("quadrature_variance of vacuum against itself is 0 dB") {
    const auto vac = white_noise_f(1 << 20, 1.0, 77);
    const BandVariance bv =
        quadrature_variance(vac, vac, {}, 200e6, 10.2e6, 14.2e6);
    CHECK(bv.linear == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bv.db == doctest::Approx(0.0));
}

TEST_CASE("quadrature_variance recovers a known squeezed level") {
    const double v_target = 0.4266;  // about -3.7 dB
    const std::size_t n = 1 << 21;
    const auto hd = white_noise_f(n, std::sqrt(v_target), 201);
    const auto vac = white_noise_f(n, 1.0, 202);
    const BandVariance bv =
        quadrature_variance(hd, vac, {}, 200e6, 10.2e6, 14.2e6);
    CHECK(bv.db == doctest::Approx(to_db(v_target)).epsilon(0.03));
    CHECK(std::abs(bv.db - (-3.7)) < 0.15);

    const auto anti = white_noise_f(n, std::sqrt(1.0 / v_target), 203);
    const BandVariance bp =
        quadrature_variance(anti, vac, {}, 200e6, 10.2e6, 14.2e6);
    CHECK(bp.db == doctest::Approx(-to_db(v_target)).epsilon(0.03));
}

TEST_CASE("quadrature_variance subtracts the dark floor") {
    const double v_target = 0.5;
    const double dark_std = 0.4;
    const std::size_t n = 1 << 21;
    auto hd = white_noise_f(n, std::sqrt(v_target), 301);
    auto vac = white_noise_f(n, 1.0, 302);
    const auto dark = white_noise_f(n, dark_std, 303);
    const auto dark_hd = white_noise_f(n, dark_std, 304);
    const auto dark_vac = white_noise_f(n, dark_std, 305);
    for (std::size_t k = 0; k < n; ++k) {
        hd[k] += dark_hd[k];
        vac[k] += dark_vac[k];
    }
    const BandVariance bv =
        quadrature_variance(hd, vac, dark, 200e6, 10.2e6, 14.2e6);
    CHECK(bv.linear == doctest::Approx(v_target).epsilon(0.03));
}

TEST_CASE("quadrature_variance rejects insufficient calibration") {
    const auto hd = white_noise_f(1 << 16, 1.0, 401);
    const std::vector<float> zeros(1 << 16, 0.0f);
    CHECK_THROWS_AS(
        quadrature_variance(hd, zeros, {}, 200e6, 10.2e6, 14.2e6),
        CalibrationError);
    const auto dark = white_noise_f(1 << 16, 2.0, 402);
    const auto vac = white_noise_f(1 << 16, 1.0, 403);
    CHECK_THROWS_AS(
        quadrature_variance(hd, vac, dark, 200e6, 10.2e6, 14.2e6),
        CalibrationError);
    CHECK_THROWS_AS(quadrature_variance(hd, vac, {}, 200e6, 14e6, 10e6),
                    std::invalid_argument);
}

TEST_CASE("db conversions are inverse") {
    for (double v : {0.01, 0.4266, 1.0, 16.5}) {
        CHECK(from_db(to_db(v)) == doctest::Approx(v).epsilon(1e-12));
    }
    CHECK(to_db(1.0) == 0.0);
}

TEST_CASE("fit recovers exact model parameters from noiseless data") {
    const double eta = 0.64;
    const double sigma = 0.056;
    std::vector<VariancePoint> pts;
    for (double p : {0.5, 1.0, 1.6, 2.1, 2.6, 3.5})
        pts.push_back(model_point(p, eta, sigma));
    const FitResult fit = fit_squeezing_model(pts, {});
    CHECK(fit.converged);
    CHECK(fit.efficiency == doctest::Approx(eta).epsilon(1e-6));
    CHECK(fit.phase_noise_std_rad == doctest::Approx(sigma).epsilon(1e-5));
    CHECK(fit.residual_norm < 1e-8);
    CHECK(fit.parameter_covariance[0][0] > 0.0);
    CHECK(fit.parameter_covariance[1][1] > 0.0);
}

TEST_CASE("fit recovers parameters under multiplicative noise") {
    const double eta = 0.64;
    const double sigma = 0.056;
    int good = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        Rng rng(9000 + trial);
        std::vector<VariancePoint> pts;
        for (double p : {0.5, 1.0, 1.6, 2.1, 2.6, 3.5}) {
            VariancePoint v = model_point(p, eta, sigma);
            v.v_minus *= 1.0 + 0.02 * rng.gaussian();
            v.v_plus *= 1.0 + 0.02 * rng.gaussian();
            pts.push_back(v);
        }
        try {
            const FitResult fit = fit_squeezing_model(pts, {});
            if (std::abs(fit.efficiency - eta) < 0.03 &&
                std::abs(fit.phase_noise_std_rad - sigma) < 0.015)
                ++good;
        } catch (const FitError&) {
        }
    }
    CHECK(good >= 18);
}

TEST_CASE("fit handles the sigma=0 boundary") {
    std::vector<VariancePoint> pts;
    for (double p : {0.5, 1.0, 1.6, 2.1, 2.6})
        pts.push_back(model_point(p, 0.64, 0.0));
    const FitResult fit = fit_squeezing_model(pts, {});
    CHECK(fit.converged);
    CHECK(fit.efficiency == doctest::Approx(0.64).epsilon(1e-4));
    const double se = std::sqrt(std::max(fit.parameter_covariance[1][1], 0.0));
    CHECK(std::abs(fit.phase_noise_std_rad) <= 2.0 * se + 1e-3);
}

TEST_CASE("fit reports unphysical efficiency through FitError") {
    // Data generated with eta > 1 cannot be explained inside (0, 1].
    std::vector<VariancePoint> pts;
    for (double p : {0.5, 1.0, 1.6, 2.1, 2.6}) {
        SqueezerModel m;
        m.pump_power_mw = p;
        const QuadratureVariances v0 = opo_variances(m);
        VariancePoint pt;
        pt.pump_power_mw = p;
        // Rescale the quantum part by 1.3 by hand.
        pt.v_minus = 1.0 + 1.3 * (v0.v_minus - 1.0) / 0.64;
        pt.v_plus = 1.0 + 1.3 * (v0.v_plus - 1.0) / 0.64;
        if (pt.v_minus <= 0.0) pt.v_minus = 1e-4;
        pts.push_back(pt);
    }
    bool threw = false;
    try {
        fit_squeezing_model(pts, {});
    } catch (const FitError& e) {
        threw = true;
        CHECK(e.best_iterate.iterations > 0);
    }
    CHECK(threw);
}

TEST_CASE("fit rejects malformed inputs") {
    std::vector<VariancePoint> two = {model_point(1.0, 0.6, 0.05),
                                      model_point(2.0, 0.6, 0.05)};
    CHECK_THROWS_AS(fit_squeezing_model(two, {}), std::invalid_argument);
    std::vector<VariancePoint> bad = {model_point(0.5, 0.6, 0.05),
                                      model_point(1.0, 0.6, 0.05),
                                      model_point(2.0, 0.6, 0.05)};
    bad[1].statistical_uncertainty = 0.0;
    CHECK_THROWS_AS(fit_squeezing_model(bad, {}), std::invalid_argument);
    bad[1].statistical_uncertainty = 0.01;
    bad[2].v_minus = -0.1;
    CHECK_THROWS_AS(fit_squeezing_model(bad, {}), std::invalid_argument);
}

TEST_CASE("distance fit reproduces an exact line") {
    const std::vector<double> l = {0.01, 1.0, 5.0, 10.0, 40.0};
    std::vector<double> s(l.size());
    for (std::size_t k = 0; k < l.size(); ++k) s[k] = 0.050 + 0.0017 * l[k];
    const DistanceFit fit = phase_noise_vs_distance(l, s);
    CHECK(fit.slope_rad_per_km == doctest::Approx(0.0017).epsilon(1e-12));
    CHECK(fit.intercept_rad == doctest::Approx(0.050).epsilon(1e-12));
    CHECK(fit.slope_stderr < 1e-12);

    const std::vector<double> flat = {0.06, 0.06, 0.06, 0.06, 0.06};
    const DistanceFit zero = phase_noise_vs_distance(l, flat);
    CHECK(std::abs(zero.slope_rad_per_km) < 1e-15);
}

TEST_CASE("distance fit rejects degenerate inputs") {
    const std::vector<double> two_l = {1.0, 2.0};
    const std::vector<double> two_s = {0.1, 0.2};
    const std::vector<double> three_l = {1.0, 2.0, 3.0};
    const std::vector<double> same_l = {2.0, 2.0, 2.0};
    const std::vector<double> three_s = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS(phase_noise_vs_distance(two_l, two_s),
                    std::invalid_argument);
    CHECK_THROWS_AS(phase_noise_vs_distance(three_l, two_s),
                    std::invalid_argument);
    CHECK_THROWS_AS(phase_noise_vs_distance(same_l, three_s),
                    std::invalid_argument);
}

TEST_CASE("pilot estimator agrees with the controller's residual phase") {
    Scenario s;
    s.seed = 71;
    s.seed_present = true;
    s.duration_s = 0.015;
    s.squeezer.pump_power_mw = 0.0;
    const SimulationTrace t = run_closed_loop(s);
    REQUIRE(t.lock_acquired);
    const ResidualStats st = residual_stats(t);

    const auto first = static_cast<std::size_t>(
        (t.acquisition_time_s + 2e-3) * t.sample_rate_hz);
    REQUIRE(first < t.homodyne.size());
    const std::vector<float> tail(t.homodyne.begin() +
                                      static_cast<std::ptrdiff_t>(first),
                                  t.homodyne.end());
    const PhaseTrace pt =
        estimate_phase(tail, s.pilot.offset_frequency_hz, t.sample_rate_hz);
    CHECK(pt.sigma_rad() == doctest::Approx(st.sigma_rad).epsilon(0.25));
}
