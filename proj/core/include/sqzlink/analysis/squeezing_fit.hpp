#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace sqz {

// One measured (squeezed, anti-squeezed) variance pair.
struct VariancePoint {
    double pump_power_mw = 0.0;
    double fiber_length_km = 0.0;
    double v_minus = 1.0;  // shot-noise units, linear
    double v_plus = 1.0;
    // Fractional one-sigma uncertainty; each residual is weighted by
    // 1 / (uncertainty * measured value), so V- and V+ contribute
    // comparably despite their different magnitudes.
    double statistical_uncertainty = 0.01;
};

struct FitFixedParams {
    double threshold_power_mw = 5.12;
    double measurement_frequency_hz = 12.2e6;
    double hwhm_bandwidth_hz = 66e6;
};

struct FitResult {
    double efficiency = 0.0;          // eta
    double phase_noise_std_rad = 0.0; // sigma
    double residual_norm = 0.0;       // sqrt(weighted SSE)
    std::array<std::array<double, 2>, 2> parameter_covariance{};
    int iterations = 0;
    bool converged = false;
};

struct FitError : std::runtime_error {
    FitError(const std::string& msg, FitResult best)
        : std::runtime_error(msg), best_iterate(best) {}
    FitResult best_iterate;
};

// Weighted nonlinear least squares of the phase-noise-mixed squeezing model
// over (eta, sigma), jointly on V- and V+ in linear units. Damped
// Gauss-Newton: a step is accepted only if the weighted cost decreases,
// otherwise the damping factor grows and the step is retried.
FitResult fit_squeezing_model(const std::vector<VariancePoint>& points,
                              const FitFixedParams& fixed,
                              double initial_sigma_rad = 0.05,
                              int max_iterations = 200);

// Ordinary least-squares line through (length, sigma) points.
struct DistanceFit {
    double slope_rad_per_km = 0.0;
    double intercept_rad = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
};

DistanceFit phase_noise_vs_distance(const std::vector<double>& lengths_km,
                                    const std::vector<double>& sigmas_rad);

}  // namespace sqz
