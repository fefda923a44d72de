#include <doctest.h>

#include <cmath>
#include <vector>

#include "sqzlink/optics/fiber.hpp"
#include "sqzlink/optics/homodyne.hpp"
#include "sqzlink/optics/laser.hpp"
#include "sqzlink/optics/squeezer.hpp"
#include "sqzlink/rng.hpp"

using namespace sqz;

TEST_CASE("noiseless static laser keeps its phase") {
    Rng rng(1);
    LaserState s;
    s.phase_rad = 0.7;
    const LaserState next = step_laser(s, 1e-6, rng);
    CHECK(next.phase_rad == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("pure rotation advances by frequency*dt") {
    Rng rng(1);
    LaserState s;
    s.angular_frequency_offset_rad_s = kTwoPi * 1e3;
    const LaserState next = step_laser(s, 1e-3, rng);
    CHECK(next.phase_rad == doctest::Approx(kTwoPi).epsilon(1e-12));
}

TEST_CASE("Wiener increment variance matches 2*pi*linewidth*dt") {
    Rng rng(42);
    LaserState s;
    s.linewidth_hz = 100.0;
    const double dt = 1e-6;
    const std::size_t n = 1'000'000;
    double prev = s.phase_rad;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        s = step_laser(s, dt, rng);
        const double inc = s.phase_rad - prev;
        prev = s.phase_rad;
        sum += inc;
        sum2 += inc * inc;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double expected = kTwoPi * 100.0 * dt;
    CHECK(var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("step_laser rejects bad inputs") {
    Rng rng(1);
    LaserState s;
    CHECK_THROWS_AS(step_laser(s, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(step_laser(s, -1e-6, rng), std::invalid_argument);
    s.phase_rad = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step_laser(s, 1e-6, rng), std::invalid_argument);
}

TEST_CASE("opo_variances at zero pump is vacuum") {
    SqueezerModel m;
    m.pump_power_mw = 0.0;
    const QuadratureVariances v = opo_variances(m);
    CHECK(v.v_minus == doctest::Approx(1.0));
    CHECK(v.v_plus == doctest::Approx(1.0));
}

TEST_CASE("opo_variances minimum-uncertainty closed form") {
    SqueezerModel m;
    m.efficiency = 1.0;
    m.measurement_frequency_hz = 0.0;
    m.threshold_power_mw = 4.0;
    m.pump_power_mw = 1.0;  // F_g = 0.5
    const QuadratureVariances v = opo_variances(m);
    CHECK(v.v_minus == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(v.v_plus == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(v.v_minus * v.v_plus == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("opo_variances reference point") {
    SqueezerModel m;  // defaults are the reference parameters
    const QuadratureVariances v = opo_variances(m);

    // Independent evaluation with long-double arithmetic and a different
    // algebraic arrangement of the same expression.
    const long double fg = sqrtl(2.6L / 5.12L);
    const long double r2 = (12.2e6L / 66e6L) * (12.2e6L / 66e6L);
    const long double vm =
        ((1.0L + fg) * (1.0L + fg) + r2 - 4.0L * 0.64L * fg) /
        ((1.0L + fg) * (1.0L + fg) + r2);
    const long double vp =
        ((1.0L - fg) * (1.0L - fg) + r2 + 4.0L * 0.64L * fg) /
        ((1.0L - fg) * (1.0L - fg) + r2);
    CHECK(v.v_minus == doctest::Approx(static_cast<double>(vm)).epsilon(1e-14));
    CHECK(v.v_plus == doctest::Approx(static_cast<double>(vp)).epsilon(1e-14));
    CHECK(v.v_minus == doctest::Approx(0.385).epsilon(1e-3));
}

TEST_CASE("opo_variances rejects pump at threshold") {
    SqueezerModel m;
    m.pump_power_mw = m.threshold_power_mw;
    CHECK_THROWS_AS(opo_variances(m), std::domain_error);
}

TEST_CASE("loss-limited squeezing floor over random parameters") {
    Rng rng(7);
    for (int k = 0; k < 10'000; ++k) {
        SqueezerModel m;
        m.threshold_power_mw = 1.0 + 9.0 * rng.uniform();
        m.pump_power_mw = 0.999 * m.threshold_power_mw * rng.uniform();
        m.efficiency = 0.01 + 0.99 * rng.uniform();
        m.hwhm_bandwidth_hz = 1e6 + 99e6 * rng.uniform();
        m.measurement_frequency_hz = 50e6 * rng.uniform();
        const QuadratureVariances v = opo_variances(m);
        CHECK(v.v_minus >= 1.0 - m.efficiency - 1e-12);
        CHECK(v.v_minus < 1.0);
        CHECK(v.v_plus > 1.0);
    }
}

TEST_CASE("apply_phase_noise limits") {
    const QuadratureVariances same = apply_phase_noise(0.5, 2.0, 0.0);
    CHECK(same.v_minus == doctest::Approx(0.5));
    CHECK(same.v_plus == doctest::Approx(2.0));

    const QuadratureVariances mixed = apply_phase_noise(0.5, 2.0, 50.0);
    CHECK(mixed.v_minus == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(mixed.v_plus == doctest::Approx(1.25).epsilon(1e-12));

    double prev_minus = 0.0, prev_plus = 10.0;
    for (double sigma : {0.0, 0.05, 0.1, 0.3, 1.0}) {
        const QuadratureVariances v = apply_phase_noise(0.5, 2.0, sigma);
        CHECK(v.v_minus >= prev_minus);
        CHECK(v.v_plus <= prev_plus);
        prev_minus = v.v_minus;
        prev_plus = v.v_plus;
    }
    CHECK_THROWS_AS(apply_phase_noise(0.5, 2.0, -0.1), std::invalid_argument);
}

TEST_CASE("phase-noise mixing matches Monte-Carlo quadrature sampling") {
    SqueezerModel m;
    const QuadratureVariances v0 = opo_variances(m);
    Rng rng(123);
    for (double sigma : {0.0, 0.05, 0.1, 0.3}) {
        const QuadratureVariances model = apply_phase_noise(v0, sigma);
        const std::size_t n = 10'000'000;
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double theta = sigma * rng.gaussian();
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            sum += v0.v_minus * c * c + v0.v_plus * s * s;
        }
        const double mc = sum / static_cast<double>(n);
        CHECK(std::abs(mc - model.v_minus) / model.v_minus < 0.005);
    }
}

TEST_CASE("fiber transmission closed form and multiplicativity") {
    FiberChannel f;
    f.length_km = 0.0;
    CHECK(f.power_transmission() == doctest::Approx(1.0));

    f.length_km = 40.0;
    CHECK(f.power_transmission() ==
          doctest::Approx(std::pow(10.0, -0.72)).epsilon(1e-12));
    CHECK(0.64 * f.power_transmission() == doctest::Approx(0.122).epsilon(0.01));

    FiberChannel half = f;
    half.length_km = 20.0;
    CHECK(half.power_transmission() * half.power_transmission() ==
          doctest::Approx(f.power_transmission()).epsilon(1e-14));

    double prev = 2.0;
    for (double l : {0.0, 1.0, 5.0, 10.0, 40.0}) {
        FiberChannel c;
        c.length_km = l;
        CHECK(c.power_transmission() < prev);
        prev = c.power_transmission();
    }

    FiberChannel bad;
    bad.length_km = -1.0;
    CHECK_THROWS_AS(bad.power_transmission(), std::invalid_argument);
}

TEST_CASE("fiber drift variance is linear in time and length") {
    auto accumulated_var = [](double length_km, double total_s) {
        FiberChannel f;
        f.length_km = length_km;
        Rng rng(99);
        const double dt = 1e-5;
        const auto steps = static_cast<std::size_t>(total_s / dt);
        double sum2 = 0.0;
        const int trials = 400;
        for (int t = 0; t < trials; ++t) {
            double phase = 0.0;
            for (std::size_t k = 0; k < steps; ++k)
                phase += f.drift_increment(dt, rng);
            sum2 += phase * phase;
        }
        return sum2 / trials;
    };
    const double v1 = accumulated_var(1.0, 1e-2);
    const double v2t = accumulated_var(1.0, 2e-2);
    const double v2l = accumulated_var(2.0, 1e-2);
    CHECK(v1 == doctest::Approx(120.0 * 1.0 * 1e-2).epsilon(0.15));
    CHECK(v2t == doctest::Approx(2.0 * v1).epsilon(0.2));
    CHECK(v2l == doctest::Approx(2.0 * v1).epsilon(0.2));
}

TEST_CASE("fiber_transmit scales power and keeps zero-length phase") {
    FiberChannel f;
    f.length_km = 0.0;
    Rng rng(5);
    const FiberOutput out = fiber_transmit(f, 5e-6, 0.25, 1e-6, rng);
    CHECK(out.power_w == doctest::Approx(5e-6));
    CHECK(out.added_phase_rad == doctest::Approx(0.25));

    f.length_km = 40.0;
    const FiberOutput far = fiber_transmit(f, 5e-6, 0.0, 1e-6, rng);
    CHECK(far.power_w == doctest::Approx(5e-6 * std::pow(10.0, -0.72)));
}

TEST_CASE("homodyne pilot tone amplitude matches the beat prefactor") {
    HomodyneReceiver rx;
    rx.electronic_noise_clearance_db = 60.0;
    const double pilot_power = 5e-6;
    const double expected = rx.pilot_beat_amplitude(pilot_power);
    Rng rng(11);
    const double fs = rx.sample_rate_hz;
    const std::size_t n = 1 << 20;
    double ic = 0.0;
    QuadratureVariances vac;
    for (std::size_t k = 0; k < n; ++k) {
        const double ph = kTwoPi * 40e6 * static_cast<double>(k) / fs;
        const double s = rx.sample(pilot_power, ph, 0.0, vac, rng);
        ic += s * std::cos(ph);
    }
    const double amplitude = 2.0 * ic / static_cast<double>(n);
    CHECK(amplitude == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("homodyne vacuum trace has unit variance") {
    HomodyneReceiver rx;
    rx.electronic_noise_clearance_db = 80.0;
    Rng rng(13);
    QuadratureVariances vac;
    const std::size_t n = 1'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = rx.sample(0.0, 0.0, 0.0, vac, rng);
        sum += s;
        sum2 += s * s;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("homodyne clips at full scale") {
    HomodyneReceiver rx;
    rx.full_scale = 1.0;
    Rng rng(17);
    QuadratureVariances vac;
    for (int k = 0; k < 1000; ++k) {
        const double s = rx.sample(1e-3, 0.0, 0.0, vac, rng);
        CHECK(std::abs(s) <= 1.0);
    }
}
