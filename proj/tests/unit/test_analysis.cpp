#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "homsim/analysis.hpp"
#include "homsim/error.hpp"

using namespace homsim;

namespace
{

Histogram two_level(double bin_ns, std::size_t bins, std::uint64_t signal, std::uint64_t background,
                    std::size_t signal_bins)
{
    Histogram h;
    h.bin_ns = bin_ns;
    h.counts.assign(bins, background);
    for (std::size_t i = 0; i < signal_bins; ++i)
        h.counts[i] = signal;
    return h;
}

}  // namespace

TEST_SUITE("analysis")
{
    TEST_CASE("normalized rate")
    {
        CHECK(normalized_rate({100, 100, 5, 2000}) == 1.0);
        CHECK(normalized_rate({200, 50, 5, 1000}) == 0.5);
        CHECK_THROWS_AS(normalized_rate({0, 100, 0, 10}), PreconditionError);
        CHECK_THROWS_AS(normalized_rate({100, 0, 0, 10}), PreconditionError);
        CHECK_THROWS_AS(normalized_rate_sigma({0, 100, 0, 10}), PreconditionError);
    }

    TEST_CASE("property: independent channels give a normalized rate of one")
    {
        // Two independent Bernoulli channels per cycle; the estimator and its
        // sigma must describe the replicate scatter.
        std::mt19937_64 rng(77);
        std::bernoulli_distribution d1(0.02), d2(0.03);
        std::vector<double> rates;
        std::vector<double> sigmas;
        for (int rep = 0; rep < 200; ++rep)
        {
            CountSummary cs;
            cs.n_triggers = 50'000;
            for (std::uint64_t i = 0; i < cs.n_triggers; ++i)
            {
                const bool a = d1(rng), b = d2(rng);
                cs.c1 += a;
                cs.c2 += b;
                cs.c12 += a && b;
            }
            rates.push_back(normalized_rate(cs));
            sigmas.push_back(normalized_rate_sigma(cs));
        }
        const double m = oracle::mean(rates);
        const double sd = oracle::stddev(rates);
        CHECK(std::abs(m - 1.0) < 3.0 * sd / std::sqrt(200.0));
        CHECK(oracle::mean(sigmas) == doctest::Approx(sd).epsilon(0.2));
    }

    TEST_CASE("SBR estimator examples")
    {
        // 10 ns bins; 350 counts in [0,100) and 100 in [200,300).
        auto h = two_level(10.0, 100, 35, 10, 10);
        CHECK(estimate_sbr(h, {0, 100}, {200, 300}) == doctest::Approx(2.5).epsilon(1e-12));
        const auto flat = two_level(10.0, 100, 10, 10, 0);
        CHECK(estimate_sbr(flat, {0, 100}, {200, 300}) == 0.0);

        const auto clean = two_level(10.0, 100, 35, 0, 10);
        try
        {
            estimate_sbr(clean, {0, 100}, {200, 300});
            FAIL("expected ZeroBackgroundError");
        }
        catch (const ZeroBackgroundError& e)
        {
            CHECK(e.lower_bound() == doctest::Approx(349.0));
        }
        CHECK_THROWS_AS(estimate_sbr(h, {0, 100}, {200, 250}), PreconditionError);
        CHECK_THROWS_AS(estimate_sbr(h, {0, 100}, {50, 150}), PreconditionError);
    }

    TEST_CASE("the SBR law")
    {
        CHECK(visibility_vs_sbr(0.45, std::numeric_limits<double>::infinity()) == 0.45);
        CHECK(visibility_vs_sbr(0.45, 1e12) == doctest::Approx(0.45).epsilon(1e-9));
        CHECK(visibility_vs_sbr(0.45, 2.5) == doctest::Approx(0.2296).epsilon(1e-4));
        CHECK(visibility_vs_sbr(0.45, 37.0) == doctest::Approx(0.4267).epsilon(1e-4));
        CHECK(std::abs(visibility_vs_sbr(0.45, 37.0) - 0.419) <= 2.0 * 0.020);
        CHECK_THROWS_AS(visibility_vs_sbr(0.45, 0.0), PreconditionError);
    }

    TEST_CASE("property: the SBR law is strictly increasing and vanishes at zero SBR")
    {
        double prev = 0.0;
        for (double lg = -6.0; lg <= 6.0; lg += 0.01)
        {
            const double v = visibility_vs_sbr(0.45, std::pow(10.0, lg));
            CHECK(v > prev);
            prev = v;
        }
        CHECK(visibility_vs_sbr(0.45, 1e-9) < 1e-15);
    }

    TEST_CASE("threshold")
    {
        CHECK(mdiqkd_threshold_check(0.419));
        CHECK_FALSE(mdiqkd_threshold_check(0.259));
        CHECK_FALSE(mdiqkd_threshold_check(0.37));
        CHECK(mdiqkd_threshold_check(std::nextafter(0.37, 1.0)));
        CHECK_THROWS_AS(mdiqkd_threshold_check(1.2), PreconditionError);
    }
}
