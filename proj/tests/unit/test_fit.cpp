#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "homsim/analysis.hpp"
#include "homsim/error.hpp"
#include "homsim/fit.hpp"

using namespace homsim;

namespace
{

std::vector<RatePoint> to_points(const std::vector<oracle::SyntheticPoint>& s)
{
    std::vector<RatePoint> out;
    for (const auto& p : s)
        out.push_back({p.x, p.c1, p.c2, p.c12, p.n});
    return out;
}

std::vector<double> grid(double lo, double hi, double step)
{
    std::vector<double> g;
    for (double x = lo; x <= hi + 1e-9; x += step)
        g.push_back(x);
    return g;
}

double cos2(double a, double v, double t0, double th)
{
    const double c = std::cos((th - t0) * std::numbers::pi / 180.0);
    return a * (1.0 - v * c * c);
}

}  // namespace

TEST_SUITE("fit")
{
    TEST_CASE("model functions")
    {
        CHECK(CosineSquared{2.0, 0.5, 10.0}(10.0) == doctest::Approx(1.0));
        CHECK(CosineSquared{2.0, 0.5, 10.0}(100.0) == doctest::Approx(2.0));
        CHECK(GaussianDip{1.0, 0.25, 5.0, 100.0}(5.0) == doctest::Approx(0.75));
        CHECK(GaussianDip{1.0, 0.25, 5.0, 100.0}(105.0) == doctest::Approx(1.0 - 0.25 * std::exp(-0.5)));
        CHECK(SbrModel{0.45}(2.5) == doctest::Approx(visibility_vs_sbr(0.45, 2.5)));
        CHECK(model_name(FitModel{CosineSquared{}}) == "cos2");
        CHECK(model_name(FitModel{GaussianDip{}}) == "gaussian_dip");
        CHECK(model_name(FitModel{SbrModel{}}) == "sbr");
        CHECK(model_parameters(FitModel{CosineSquared{1, 2, 3}}).size() == 3);
    }

    TEST_CASE("cos^2 fit recovers synthetic truth")
    {
        std::mt19937_64 rng(1);
        // About 1e4 coincidences per point at the flat part.
        const double c1 = 2e5, c2 = 2e5, n = 4e6;
        const auto data = oracle::poisson_curve(
            grid(-90, 90, 15), [](double th) { return cos2(1.0, 0.42, 0.0, th); }, c1, c2, n, rng);
        const auto f = fit_cos2(to_points(data));
        const auto& m = std::get<CosineSquared>(f.model);
        const auto& s = std::get<CosineSquared>(f.sigma);
        CHECK(std::abs(m.visibility - 0.42) < 2.0 * s.visibility);
        CHECK(std::abs(m.theta0_deg) < 2.0 * s.theta0_deg + 1e-9);
        CHECK(std::abs(m.amplitude - 1.0) < 3.0 * s.amplitude);
        CHECK(s.visibility > 0.0);
        CHECK(f.n_points == 13);
    }

    TEST_CASE("cos^2 fit wraps theta0 into (-90, 90]")
    {
        for (double t0 : {-80.0, -35.0, 0.0, 44.0, 89.0})
        {
            std::vector<RatePoint> pts;
            for (double th : grid(-90, 90, 10))
                pts.push_back({th, 1e4, 1e4, 1e4 * 1e4 * cos2(1.3, 0.4, t0, th) / 1e6, 1e6});
            const auto f = fit_cos2(pts);
            const auto& m = std::get<CosineSquared>(f.model);
            CHECK(m.theta0_deg > -90.0);
            CHECK(m.theta0_deg <= 90.0);
            CHECK(m.theta0_deg == doctest::Approx(t0).epsilon(1e-4));
            CHECK(m.visibility == doctest::Approx(0.4).epsilon(1e-5));
            CHECK(m.amplitude == doctest::Approx(1.3).epsilon(1e-5));
        }
    }

    TEST_CASE("V = 0 data is consistent with zero")
    {
        std::mt19937_64 rng(2);
        const auto data = oracle::poisson_curve(
            grid(-90, 90, 15), [](double) { return 1.0; }, 2e5, 2e5, 4e6, rng);
        const auto f = fit_cos2(to_points(data));
        CHECK(f.visibility() < 2.0 * f.visibility_sigma() + 1e-6);
        CHECK(f.visibility() >= 0.0);

        const auto flat = oracle::poisson_curve(
            grid(-600, 600, 50), [](double) { return 1.0; }, 2e5, 2e5, 4e6, rng);
        const auto g = fit_gaussian_dip(to_points(flat));
        CHECK(g.visibility() < 2.0 * g.visibility_sigma() + 1e-6);
    }

    TEST_CASE("Gaussian dip fit recovers synthetic truth")
    {
        std::mt19937_64 rng(3);
        const GaussianDip truth{1.0, 0.25, 0.0, 120.0};
        const auto data = oracle::poisson_curve(grid(-600, 600, 50), truth, 2e5, 2e5, 4e6, rng);
        const auto f = fit_gaussian_dip(to_points(data));
        const auto& m = std::get<GaussianDip>(f.model);
        const auto& s = std::get<GaussianDip>(f.sigma);
        CHECK(std::abs(m.visibility - 0.25) < 2.0 * s.visibility);
        CHECK(std::abs(m.center_ns) < 3.0 * s.center_ns);
        CHECK(std::abs(m.sigma_ns - 120.0) < 3.0 * s.sigma_ns);
    }

    TEST_CASE("noise-free dip is recovered exactly")
    {
        const GaussianDip truth{0.9, 0.3, 40.0, 150.0};
        std::vector<RatePoint> pts;
        for (double x : grid(-700, 700, 50))
            pts.push_back({x, 1e4, 1e4, 1e4 * 1e4 * truth(x) / 1e6, 1e6});
        const auto m = std::get<GaussianDip>(fit_gaussian_dip(pts).model);
        CHECK(m.visibility == doctest::Approx(0.3).epsilon(1e-5));
        CHECK(m.center_ns == doctest::Approx(40.0).epsilon(1e-4));
        CHECK(m.sigma_ns == doctest::Approx(150.0).epsilon(1e-4));
        CHECK(m.baseline == doctest::Approx(0.9).epsilon(1e-5));
    }

    TEST_CASE("bootstrap spread agrees with the curvature sigma")
    {
        std::mt19937_64 rng(4);
        const auto data = oracle::poisson_curve(
            grid(-90, 90, 15), [](double th) { return cos2(1.0, 0.42, 0.0, th); }, 1e5, 1e5, 4e6, rng);
        FitOptions opt;
        opt.bootstrap_resamples = 200;
        const auto f = fit_cos2(to_points(data), opt);
        REQUIRE(f.bootstrap.has_value());
        CHECK(fitted_visibility(*f.bootstrap) == doctest::Approx(f.visibility_sigma()).epsilon(0.3));
        // Deterministic for a fixed seed.
        CHECK(fitted_visibility(*fit_cos2(to_points(data), opt).bootstrap) == fitted_visibility(*f.bootstrap));
    }

    TEST_CASE("fit preconditions")
    {
        std::vector<RatePoint> few{{0, 1, 1, 1, 10}, {30, 1, 1, 1, 10}, {60, 1, 1, 1, 10}};
        CHECK_THROWS_AS(fit_cos2(few), PreconditionError);
        std::vector<RatePoint> narrow{{0, 1, 1, 1, 10}, {20, 1, 1, 1, 10}, {40, 1, 1, 1, 10}, {60, 1, 1, 1, 10}};
        CHECK_THROWS_AS(fit_cos2(narrow), PreconditionError);
        std::vector<RatePoint> empty{{0, 1, 1, 0, 10}, {30, 1, 1, 0, 10}, {60, 1, 1, 0, 10}, {90, 1, 1, 0, 10}};
        CHECK_THROWS_AS(fit_cos2(empty), FitError);
        std::vector<RatePoint> zero_singles{{0, 0, 1, 0, 10}, {30, 1, 1, 0, 10}, {60, 1, 1, 0, 10}, {90, 1, 1, 0, 10}};
        CHECK_THROWS_AS(fit_cos2(zero_singles), PreconditionError);
        CHECK_THROWS_AS(fit_gaussian_dip(std::span<const RatePoint>(narrow)), PreconditionError);
    }

    TEST_CASE("SBR model fit")
    {
        std::vector<SbrPoint> exact;
        for (double sbr : {2.5, 5.0, 10.0, 37.0, 1e6})
            exact.push_back({sbr, visibility_vs_sbr(0.45, sbr), 0.01});
        CHECK(fit_sbr_model(exact).visibility() == doctest::Approx(0.45).epsilon(1e-12));

        // Measured memory points that follow the SBR law (the wide dual-rail ROI does not).
        std::vector<SbrPoint> measured{{37, 0.419, 0.020}, {2.4, 0.203, 0.023}, {2.6, 0.259, 0.025}};
        const auto f = fit_sbr_model(measured);
        CHECK(std::abs(f.visibility() - 0.45) <= 0.01);
        CHECK(f.visibility_sigma() == doctest::Approx(0.01).epsilon(1.0));

        std::vector<SbrPoint> one{{1e6, 0.5, 0.01}};
        CHECK(fit_sbr_model(one).visibility() == doctest::Approx(0.5).epsilon(1e-5));
        CHECK_THROWS_AS(fit_sbr_model(std::vector<SbrPoint>{}), PreconditionError);
        CHECK_THROWS_AS(fit_sbr_model(std::vector<SbrPoint>{{0.0, 0.2, 0.01}}), FitError);
        CHECK_THROWS_AS(fit_sbr_model(std::vector<SbrPoint>{{2.0, 0.2, 0.0}}), FitError);
    }
}
