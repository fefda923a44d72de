#include "sqzlink/analysis/squeezing_fit.hpp"

#include <algorithm>
#include <cmath>

namespace sqz {

namespace {

struct ModelPoint {
    double v_minus, v_plus;
    double d_minus_eta, d_plus_eta;      // partials w.r.t. eta
    double d_minus_sigma, d_plus_sigma;  // partials w.r.t. sigma
};

// V+-0 = 1 +- eta*g+-(F) with g+- = 4F/((1 -+ F)^2 + r^2), then Gaussian
// phase-noise mixing with c = exp(-2 sigma^2).
ModelPoint evaluate(double eta, double sigma, double pump_mw,
                    const FitFixedParams& fixed) {
    const double f_g = std::sqrt(pump_mw / fixed.threshold_power_mw);
    const double r = fixed.measurement_frequency_hz / fixed.hwhm_bandwidth_hz;
    const double g_minus = 4.0 * f_g / ((1.0 + f_g) * (1.0 + f_g) + r * r);
    const double g_plus = 4.0 * f_g / ((1.0 - f_g) * (1.0 - f_g) + r * r);
    const double v_m0 = 1.0 - eta * g_minus;
    const double v_p0 = 1.0 + eta * g_plus;
    const double c = std::exp(-2.0 * sigma * sigma);
    const double dc = -4.0 * sigma * c;

    ModelPoint m;
    m.v_minus = 0.5 * (v_m0 + v_p0) + 0.5 * c * (v_m0 - v_p0);
    m.v_plus = 0.5 * (v_m0 + v_p0) - 0.5 * c * (v_m0 - v_p0);
    const double de_m0 = -g_minus;
    const double de_p0 = g_plus;
    m.d_minus_eta = 0.5 * (de_m0 + de_p0) + 0.5 * c * (de_m0 - de_p0);
    m.d_plus_eta = 0.5 * (de_m0 + de_p0) - 0.5 * c * (de_m0 - de_p0);
    m.d_minus_sigma = 0.5 * dc * (v_m0 - v_p0);
    m.d_plus_sigma = -0.5 * dc * (v_m0 - v_p0);
    return m;
}

double weighted_cost(const std::vector<VariancePoint>& points, double eta,
                     double sigma, const FitFixedParams& fixed) {
    double cost = 0.0;
    for (const auto& p : points) {
        const ModelPoint m = evaluate(eta, sigma, p.pump_power_mw, fixed);
        const double wm = 1.0 / (p.statistical_uncertainty * p.v_minus *
                                 p.statistical_uncertainty * p.v_minus);
        const double wp = 1.0 / (p.statistical_uncertainty * p.v_plus *
                                 p.statistical_uncertainty * p.v_plus);
        const double rm = m.v_minus - p.v_minus;
        const double rp = m.v_plus - p.v_plus;
        cost += wm * rm * rm + wp * rp * rp;
    }
    return cost;
}

}  // namespace

FitResult fit_squeezing_model(const std::vector<VariancePoint>& points,
                              const FitFixedParams& fixed,
                              double initial_sigma_rad, int max_iterations) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_squeezing_model: need >= 3 pump powers");
    for (const auto& p : points) {
        if (!(p.statistical_uncertainty > 0.0))
            throw std::invalid_argument("fit_squeezing_model: uncertainties must be > 0");
        if (!(p.v_plus >= p.v_minus) || !(p.v_minus > 0.0))
            throw std::invalid_argument("fit_squeezing_model: require v_plus >= v_minus > 0");
    }

    // Initial eta from the strongest anti-squeezing point; sigma from caller.
    const auto max_it = std::max_element(
        points.begin(), points.end(),
        [](const VariancePoint& a, const VariancePoint& b) {
            return a.v_plus < b.v_plus;
        });
    const double f_g = std::sqrt(max_it->pump_power_mw / fixed.threshold_power_mw);
    const double r = fixed.measurement_frequency_hz / fixed.hwhm_bandwidth_hz;
    const double g_plus = 4.0 * f_g / ((1.0 - f_g) * (1.0 - f_g) + r * r);
    double eta = std::clamp((max_it->v_plus - 1.0) / g_plus, 0.05, 1.0);
    double sigma = std::max(initial_sigma_rad, 0.0);

    double lambda = 1e-3;
    double cost = weighted_cost(points, eta, sigma, fixed);
    FitResult result;
    bool converged = false;
    int iter = 0;

    for (; iter < max_iterations && !converged; ++iter) {
        // Normal equations of the damped Gauss-Newton step.
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (const auto& p : points) {
            const ModelPoint m = evaluate(eta, sigma, p.pump_power_mw, fixed);
            const double wm = 1.0 / (p.statistical_uncertainty * p.v_minus *
                                     p.statistical_uncertainty * p.v_minus);
            const double wp = 1.0 / (p.statistical_uncertainty * p.v_plus *
                                     p.statistical_uncertainty * p.v_plus);
            const double rm = m.v_minus - p.v_minus;
            const double rp = m.v_plus - p.v_plus;
            jtj00 += wm * m.d_minus_eta * m.d_minus_eta +
                     wp * m.d_plus_eta * m.d_plus_eta;
            jtj01 += wm * m.d_minus_eta * m.d_minus_sigma +
                     wp * m.d_plus_eta * m.d_plus_sigma;
            jtj11 += wm * m.d_minus_sigma * m.d_minus_sigma +
                     wp * m.d_plus_sigma * m.d_plus_sigma;
            jtr0 += wm * m.d_minus_eta * rm + wp * m.d_plus_eta * rp;
            jtr1 += wm * m.d_minus_sigma * rm + wp * m.d_plus_sigma * rp;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
            const double a00 = jtj00 * (1.0 + lambda);
            const double a11 = std::max(jtj11 * (1.0 + lambda), 1e-30);
            const double det = a00 * a11 - jtj01 * jtj01;
            if (det <= 0.0) {
                lambda *= 2.0;
                continue;
            }
            const double d_eta = -(a11 * jtr0 - jtj01 * jtr1) / det;
            const double d_sigma = -(-jtj01 * jtr0 + a00 * jtr1) / det;
            const double eta_new = std::clamp(eta + d_eta, 1e-6, 1.5);
            const double sigma_new = std::abs(sigma + d_sigma);
            const double cost_new = weighted_cost(points, eta_new, sigma_new, fixed);
            if (cost_new <= cost) {
                if (std::abs(eta_new - eta) < 1e-12 &&
                    std::abs(sigma_new - sigma) < 1e-12)
                    converged = true;
                eta = eta_new;
                sigma = sigma_new;
                if (cost - cost_new < 1e-14 * (1.0 + cost)) converged = true;
                cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
            } else {
                lambda *= 2.0;
            }
        }
        if (!accepted) converged = true;  // damping exhausted at a minimum
    }

    result.efficiency = eta;
    result.phase_noise_std_rad = sigma;
    result.residual_norm = std::sqrt(cost);
    result.iterations = iter;
    result.converged = converged;

    // Covariance from the (undamped) Jacobian at the solution.
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0;
    for (const auto& p : points) {
        const ModelPoint m = evaluate(eta, sigma, p.pump_power_mw, fixed);
        const double wm = 1.0 / (p.statistical_uncertainty * p.v_minus *
                                 p.statistical_uncertainty * p.v_minus);
        const double wp = 1.0 / (p.statistical_uncertainty * p.v_plus *
                                 p.statistical_uncertainty * p.v_plus);
        jtj00 += wm * m.d_minus_eta * m.d_minus_eta +
                 wp * m.d_plus_eta * m.d_plus_eta;
        jtj01 += wm * m.d_minus_eta * m.d_minus_sigma +
                 wp * m.d_plus_eta * m.d_plus_sigma;
        jtj11 += wm * m.d_minus_sigma * m.d_minus_sigma +
                 wp * m.d_plus_sigma * m.d_plus_sigma;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (det > 0.0) {
        result.parameter_covariance[0][0] = jtj11 / det;
        result.parameter_covariance[0][1] = -jtj01 / det;
        result.parameter_covariance[1][0] = -jtj01 / det;
        result.parameter_covariance[1][1] = jtj00 / det;
    }

    if (!converged)
        throw FitError("fit_squeezing_model: no convergence after max iterations",
                       result);
    if (eta <= 0.0 || eta > 1.0)
        throw FitError("fit_squeezing_model: fitted efficiency " +
                           std::to_string(eta) + " outside (0, 1]",
                       result);
    return result;
}

DistanceFit phase_noise_vs_distance(const std::vector<double>& lengths_km,
                                    const std::vector<double>& sigmas_rad) {
    if (lengths_km.size() != sigmas_rad.size())
        throw std::invalid_argument("phase_noise_vs_distance: size mismatch");
    if (lengths_km.size() < 3)
        throw std::invalid_argument("phase_noise_vs_distance: need >= 3 distances");
    double min_l = lengths_km[0], max_l = lengths_km[0];
    for (double l : lengths_km) {
        min_l = std::min(min_l, l);
        max_l = std::max(max_l, l);
    }
    if (min_l == max_l)
        throw std::invalid_argument(
            "phase_noise_vs_distance: need >= 2 distinct lengths");

    const double n = static_cast<double>(lengths_km.size());
    double sx = 0.0, sxx = 0.0, sy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lengths_km.size(); ++k) {
        sx += lengths_km[k];
        sxx += lengths_km[k] * lengths_km[k];
        sy += sigmas_rad[k];
        sxy += lengths_km[k] * sigmas_rad[k];
    }
    const double denom = n * sxx - sx * sx;
    DistanceFit fit;
    fit.slope_rad_per_km = (n * sxy - sx * sy) / denom;
    fit.intercept_rad = (sy - fit.slope_rad_per_km * sx) / n;

    double sse = 0.0;
    for (std::size_t k = 0; k < lengths_km.size(); ++k) {
        const double r = sigmas_rad[k] - fit.intercept_rad -
                         fit.slope_rad_per_km * lengths_km[k];
        sse += r * r;
    }
    const double dof = n > 2.0 ? n - 2.0 : 1.0;
    const double s2 = sse / dof;
    fit.slope_stderr = std::sqrt(s2 * n / denom);
    fit.intercept_stderr = std::sqrt(s2 * sxx / denom);
    return fit;
}

}  // namespace sqz
