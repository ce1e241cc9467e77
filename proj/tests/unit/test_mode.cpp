#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "homsim/error.hpp"
#include "homsim/mode.hpp"

using namespace homsim;

namespace
{

constexpr double kPi = std::numbers::pi;

double u01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

PolarizationState random_pol(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return PolarizationState::from_jones(Jones(std::complex<double>(n(rng), n(rng)), std::complex<double>(n(rng), n(rng))), u(rng));
}

TemporalEnvelope random_envelope(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> c(-500.0, 500.0);
    std::uniform_real_distribution<double> f(50.0, 600.0);
    if (u01(rng) < 0.3)
    {
        const double center = c(rng);
        return TemporalEnvelope::truncated_front(center, f(rng), center + c(rng) * 0.2);
    }
    return TemporalEnvelope::gaussian(c(rng), f(rng));
}

}  // namespace

TEST_SUITE("mode")
{
    TEST_CASE("polarization overlap of canonical states")
    {
        const auto h = PolarizationState::horizontal();
        CHECK(std::abs(polarization_overlap(h, h) - 1.0) < 1e-15);
        CHECK(std::abs(polarization_overlap(h, PolarizationState::vertical())) < 1e-15);
        const auto d = PolarizationState::linear(kPi / 4);
        CHECK(std::abs(polarization_overlap(h, d)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(std::norm(polarization_overlap(h, d)) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::abs(polarization_overlap(PolarizationState::diagonal(), PolarizationState::antidiagonal())) < 1e-15);
    }

    TEST_CASE("cos^2 law on a grid")
    {
        const auto h = PolarizationState::horizontal();
        for (int deg = -180; deg <= 180; deg += 5)
        {
            const double th = deg * kPi / 180.0;
            CHECK(std::abs(std::norm(polarization_overlap(h, PolarizationState::linear(th))) -
                           std::cos(th) * std::cos(th)) < 1e-12);
            CHECK(std::abs(std::norm(polarization_overlap(h, h.rotated(th))) - std::cos(th) * std::cos(th)) < 1e-12);
        }
    }

    TEST_CASE("dop scales the polarization overlap")
    {
        const auto a = PolarizationState::linear(0.3, 0.96);
        const auto b = PolarizationState::linear(0.3, 0.9);
        CHECK(std::abs(polarization_overlap(a, b)) == doctest::Approx(std::sqrt(0.96 * 0.9)).epsilon(1e-14));
        OpticalMode m1{TemporalEnvelope::gaussian(0, 400), {}, PolarizationState::horizontal(0.96)};
        OpticalMode m2 = m1;
        m2.polarization = PolarizationState::linear(0.5, 0.96);
        CHECK(std::norm(mode_overlap(m1, m2)) ==
              doctest::Approx(std::cos(0.5) * std::cos(0.5) * 0.96 * 0.96).epsilon(1e-9));
    }

    TEST_CASE("polarization state invariants")
    {
        const auto s = PolarizationState::from_jones(Jones(std::complex<double>(3.0, 1.0), std::complex<double>(0.0, -2.0)), 0.5);
        CHECK(s.jones.squaredNorm() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK_THROWS_AS(PolarizationState::from_jones(Jones(0.0, 0.0)), PreconditionError);
        CHECK_THROWS_AS(PolarizationState::horizontal(1.2), PreconditionError);
        CHECK_THROWS_AS(PolarizationState::horizontal(-0.1), PreconditionError);
    }

    TEST_CASE("temporal overlap examples")
    {
        const auto a = TemporalEnvelope::gaussian(0.0, 200.0);
        CHECK(std::abs(temporal_overlap(a, a) - 1.0) < 1e-9);
        const auto z = temporal_overlap(a, a.shifted(200.0));
        const double oracle = oracle::temporal_overlap(0.0, 200.0, 200.0, 200.0);
        CHECK(std::norm(z) == doctest::Approx(0.25).epsilon(1e-6));
        CHECK(std::abs(z) == doctest::Approx(oracle).epsilon(1e-6));
        CHECK(std::norm(z) == doctest::Approx(std::exp(-2.0 * std::log(2.0))).epsilon(1e-6));
        CHECK(std::abs(temporal_overlap(a, a.shifted(1e5))) < 1e-9);
    }

    TEST_CASE("temporal overlap matches the closed form and the quadrature oracle")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> f(50.0, 800.0);
        std::uniform_real_distribution<double> d(-600.0, 600.0);
        for (int i = 0; i < 20; ++i)
        {
            const double fa = f(rng), fb = f(rng), off = d(rng);
            const auto a = TemporalEnvelope::gaussian(0.0, fa);
            const auto b = TemporalEnvelope::gaussian(off, fb);
            const double closed = gaussian_amplitude_overlap(off, a.sigma_ns(), b.sigma_ns());
            CHECK(std::abs(temporal_overlap(a, b)) == doctest::Approx(closed).epsilon(1e-6));
            CHECK(closed == doctest::Approx(oracle::temporal_overlap(0.0, fa, off, fb)).epsilon(1e-6));
        }
    }

    TEST_CASE("spectral overlap")
    {
        const SpectralMode a{-320.0, 1.0};
        CHECK(std::abs(spectral_overlap(a, a) - 1.0) < 1e-12);
        CHECK(std::abs(spectral_overlap(a, SpectralMode{-320.0 + 1e4, 1.0})) < 1e-9);
        const SpectralMode b{-319.0, 1.0};
        CHECK(std::abs(spectral_overlap(a, b)) ==
              doctest::Approx(oracle::temporal_overlap(-320.0, 1.0, -319.0, 1.0)).epsilon(1e-6));
        CHECK_THROWS_AS(spectral_overlap(a, SpectralMode{0.0, -1.0}), PreconditionError);
    }

    TEST_CASE("mode overlap factorizes")
    {
        OpticalMode a{TemporalEnvelope::gaussian(0, 200), {-320.0, 2.0}, PolarizationState::horizontal()};
        CHECK(mode_overlap(a, a) == std::complex<double>(1.0, 0.0));
        OpticalMode b = a;
        b.envelope = a.envelope.shifted(200.0);
        CHECK(std::norm(mode_overlap(a, b)) == doctest::Approx(0.25).epsilon(1e-6));
        b.polarization = PolarizationState::linear(kPi / 3);
        b.spectrum.detuning_mhz = -319.0;
        const auto expected =
            temporal_overlap(a.envelope, b.envelope) * spectral_overlap(a.spectrum, b.spectrum) *
            polarization_overlap(a.polarization, b.polarization);
        CHECK(std::abs(mode_overlap(a, b) - expected) < 1e-15);
    }

    TEST_CASE("envelopes are unit normalized")
    {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 30; ++i)
        {
            const auto e = random_envelope(rng);
            const auto [lo, hi] = e.support();
            CHECK(e.fraction_in(lo - 1e4, hi + 1e4) == doctest::Approx(1.0).epsilon(1e-8));
            CHECK(oracle::midpoint([&](double t) { return e.intensity(t); }, lo - 100, hi + 100) ==
                  doctest::Approx(1.0).epsilon(1e-5));
        }
        CHECK_THROWS_AS(TemporalEnvelope::gaussian(0, 0), PreconditionError);
    }

    TEST_CASE("truncated envelope vanishes after the cut")
    {
        const auto e = TemporalEnvelope::truncated_front(1000.0, 400.0, 1000.0);
        CHECK(e.intensity(1000.1) == 0.0);
        CHECK(e.intensity(999.0) > 0.0);
        CHECK(e.fraction_in(-1e5, 1000.0) == doctest::Approx(1.0).epsilon(1e-8));
        // Half a Gaussian renormalized: density doubles.
        CHECK(e.intensity(900.0) == doctest::Approx(2.0 * oracle::gaussian_intensity(900.0, 1000.0, 400.0)).epsilon(1e-12));
    }

    TEST_CASE("property: overlaps are bounded, Hermitian and phase invariant")
    {
        std::mt19937_64 rng(2024);
        for (int i = 0; i < 200; ++i)
        {
            const auto pa = random_pol(rng);
            const auto pb = random_pol(rng);
            const auto z = polarization_overlap(pa, pb);
            CHECK(std::abs(z) <= 1.0 + 1e-12);
            CHECK(std::abs(z - std::conj(polarization_overlap(pb, pa))) < 1e-12);

            const double chi = 2 * kPi * u01(rng);
            const auto shifted = PolarizationState{pa.jones * std::polar(1.0, chi), pa.dop};
            CHECK(std::abs(polarization_overlap(shifted, pb)) == doctest::Approx(std::abs(z)).epsilon(1e-12));

            if (i < 40)
            {
                const OpticalMode ma{random_envelope(rng), {-320.0 + 3 * u01(rng), 2 * u01(rng) + 0.5}, pa};
                const OpticalMode mb{random_envelope(rng), {-320.0 + 3 * u01(rng), 2 * u01(rng) + 0.5}, pb};
                const auto zm = mode_overlap(ma, mb);
                CHECK(std::abs(zm) <= 1.0 + 1e-9);
                CHECK(std::abs(zm - std::conj(mode_overlap(mb, ma))) < 1e-9);
                OpticalMode pure = ma;
                pure.polarization.dop = 1.0;
                CHECK(std::abs(mode_overlap(pure, pure) - 1.0) < 1e-12);
            }
        }
    }
}
