#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "homsim/roi.hpp"

namespace homsim
{

/// One scan point. Counts are doubles so expected (noise-free) counts can be
/// fitted with the same code as measured ones.
struct RatePoint
{
    double x = 0.0;  // control value: angle in degrees or delay in ns
    double c1 = 0.0;
    double c2 = 0.0;
    double c12 = 0.0;
    double n = 0.0;

    static RatePoint from_counts(double x, const CountSummary& cs);
    double rate() const { return n * c12 / (c1 * c2); }
};

/// A(1 - V cos^2(theta - theta0))
struct CosineSquared
{
    double amplitude = 1.0;
    double visibility = 0.0;
    double theta0_deg = 0.0;

    double operator()(double theta_deg) const;
};

/// baseline (1 - V exp(-(tau - center)^2 / (2 sigma^2)))
struct GaussianDip
{
    double baseline = 1.0;
    double visibility = 0.0;
    double center_ns = 0.0;
    double sigma_ns = 1.0;

    double operator()(double delay_ns) const;
};

/// V_s / (1 + 1/SBR)^2
struct SbrModel
{
    double source_visibility = 0.0;

    double operator()(double sbr) const;
};

using FitModel = std::variant<CosineSquared, GaussianDip, SbrModel>;

double fitted_visibility(const FitModel& m);
std::string model_name(const FitModel& m);
std::vector<std::pair<std::string, double>> model_parameters(const FitModel& m);

struct FitResult
{
    FitModel model;
    FitModel sigma;                     // same alternative as `model`, holding 1-sigma errors
    std::optional<FitModel> bootstrap;  // bootstrap spread, when requested
    double loglik = 0.0;
    std::size_t n_points = 0;
    int iterations = 0;

    double visibility() const { return fitted_visibility(model); }
    double visibility_sigma() const { return fitted_visibility(sigma); }
};

struct FitOptions
{
    int max_iterations = 500;
    double tolerance = 1e-9;  // on the log-likelihood
    int bootstrap_resamples = 0;
    std::uint64_t seed = 1;
};

/// Poisson ML fit of c12 with expectation c1 c2 A (1 - V cos^2(theta - theta0)) / N.
/// theta0 is reported in (-90, 90].
FitResult fit_cos2(std::span<const RatePoint> points, const FitOptions& options = {});

/// Poisson ML fit of a Gaussian dip in the normalized rate versus delay.
FitResult fit_gaussian_dip(std::span<const RatePoint> points, const FitOptions& options = {});

struct SbrPoint
{
    double sbr = 0.0;
    double visibility = 0.0;
    double sigma = 0.0;
};

/// Weighted least squares for V_s. Closed form since the model is linear in V_s.
FitResult fit_sbr_model(std::span<const SbrPoint> points);

}  // namespace homsim
