#include "homsim/mode.hpp"

#include <algorithm>
#include <limits>

#include "homsim/error.hpp"
#include "homsim/quadrature.hpp"

namespace homsim
{

namespace
{

constexpr double kSupportSigmas = 6.0;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_density(double t, double center, double sigma)
{
    const double z = (t - center) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

//---------------------------------------------------------------------------//
// PolarizationState
//---------------------------------------------------------------------------//

PolarizationState PolarizationState::from_jones(const Jones& j, double dop)
{
    const double n = j.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw PreconditionError("Jones vector must be non-zero and finite");
    if (!(dop >= 0.0 && dop <= 1.0))
        throw PreconditionError("degree of polarization must lie in [0,1]");
    return PolarizationState{j / n, dop};
}

PolarizationState PolarizationState::horizontal(double dop) { return from_jones(Jones(1.0, 0.0), dop); }
PolarizationState PolarizationState::vertical(double dop) { return from_jones(Jones(0.0, 1.0), dop); }

PolarizationState PolarizationState::diagonal(double dop)
{
    const double s = std::numbers::sqrt2 / 2.0;
    return from_jones(Jones(s, s), dop);
}

PolarizationState PolarizationState::antidiagonal(double dop)
{
    const double s = std::numbers::sqrt2 / 2.0;
    return from_jones(Jones(s, -s), dop);
}

PolarizationState PolarizationState::linear(double angle_rad, double dop)
{
    return from_jones(linear_jones(angle_rad), dop);
}

PolarizationState PolarizationState::rotated(double angle_rad) const
{
    const Jones j = polarization_rotation(angle_rad).cast<std::complex<double>>() * jones;
    return PolarizationState{j, dop};
}

//---------------------------------------------------------------------------//
// TemporalEnvelope
//---------------------------------------------------------------------------//

TemporalEnvelope TemporalEnvelope::gaussian(double center_ns, double fwhm_ns)
{
    if (!(fwhm_ns > 0.0))
        throw PreconditionError("envelope fwhm must be positive");
    return TemporalEnvelope{EnvelopeShape::Gaussian, center_ns, fwhm_ns, 0.0};
}

TemporalEnvelope TemporalEnvelope::truncated_front(double center_ns, double fwhm_ns, double cut_ns)
{
    auto env = gaussian(center_ns, fwhm_ns);
    if (cut_ns <= center_ns - kSupportSigmas * env.sigma_ns())
        throw PreconditionError("truncation cut leaves no intensity");
    env.shape = EnvelopeShape::TruncatedFront;
    env.cut_ns = cut_ns;
    return env;
}

double TemporalEnvelope::intensity(double t_ns) const
{
    const double sigma = sigma_ns();
    if (shape == EnvelopeShape::Gaussian)
        return gaussian_density(t_ns, center_ns, sigma);
    if (t_ns > cut_ns)
        return 0.0;
    return gaussian_density(t_ns, center_ns, sigma) / normal_cdf((cut_ns - center_ns) / sigma);
}

double TemporalEnvelope::fraction_in(double a_ns, double b_ns) const
{
    if (!(b_ns > a_ns))
        return 0.0;
    const double sigma = sigma_ns();
    if (shape == EnvelopeShape::Gaussian)
        return normal_cdf((b_ns - center_ns) / sigma) - normal_cdf((a_ns - center_ns) / sigma);
    b_ns = std::min(b_ns, cut_ns);
    if (!(b_ns > a_ns))
        return 0.0;
    const double mass = normal_cdf((cut_ns - center_ns) / sigma);
    return (normal_cdf((b_ns - center_ns) / sigma) - normal_cdf((a_ns - center_ns) / sigma)) / mass;
}

double TemporalEnvelope::peak_ns() const
{
    return shape == EnvelopeShape::TruncatedFront ? std::min(center_ns, cut_ns) : center_ns;
}

std::pair<double, double> TemporalEnvelope::support() const
{
    const double half = kSupportSigmas * sigma_ns();
    double hi = center_ns + half;
    if (shape == EnvelopeShape::TruncatedFront)
        hi = std::min(hi, cut_ns);
    return {center_ns - half, hi};
}

std::vector<double> TemporalEnvelope::breakpoints() const
{
    if (shape == EnvelopeShape::TruncatedFront)
        return {cut_ns};
    return {};
}

TemporalEnvelope TemporalEnvelope::shifted(double delay_ns) const
{
    TemporalEnvelope out = *this;
    out.center_ns += delay_ns;
    out.cut_ns += delay_ns;
    return out;
}

double transform_limited_bandwidth_mhz(double pulse_fwhm_ns)
{
    if (!(pulse_fwhm_ns > 0.0))
        throw PreconditionError("pulse fwhm must be positive");
    // Gaussian time-bandwidth product 2 ln2 / pi, ns -> MHz.
    return 2.0 * std::numbers::ln2 / std::numbers::pi / pulse_fwhm_ns * 1e3;
}

//---------------------------------------------------------------------------//
// Overlaps
//---------------------------------------------------------------------------//

std::complex<double> polarization_overlap(const PolarizationState& a, const PolarizationState& b)
{
    return jones_inner(a.jones, b.jones) * std::sqrt(a.dop * b.dop);
}

std::complex<double> temporal_overlap(const TemporalEnvelope& a, const TemporalEnvelope& b)
{
    if (a == b)
        return 1.0;
    const auto [a_lo, a_hi] = a.support();
    const auto [b_lo, b_hi] = b.support();
    if (!(std::min(a_hi, b_hi) > std::max(a_lo, b_lo)))
        return 0.0;
    // The amplitude product decays slower than either intensity, so integrate
    // over the union of the supports rather than their intersection.
    const double lo = std::min(a_lo, b_lo);
    const double hi = std::max(a_hi, b_hi);

    std::vector<double> breaks = a.breakpoints();
    const auto more = b.breakpoints();
    breaks.insert(breaks.end(), more.begin(), more.end());

    const double value = integrate_piecewise<double>(
        [&](double t) { return std::sqrt(a.intensity(t) * b.intensity(t)); }, lo, hi, breaks);
    return std::min(value, 1.0);
}

std::complex<double> spectral_overlap(const SpectralMode& a, const SpectralMode& b)
{
    if (a.bandwidth_mhz < 0.0 || b.bandwidth_mhz < 0.0)
        throw PreconditionError("spectral bandwidth must be non-negative");
    if (a == b)
        return 1.0;
    if (a.bandwidth_mhz == 0.0 || b.bandwidth_mhz == 0.0)
        return 0.0;

    // Spectral profiles share the temporal machinery: a Gaussian in frequency.
    const auto sa = TemporalEnvelope::gaussian(a.detuning_mhz, a.bandwidth_mhz);
    const auto sb = TemporalEnvelope::gaussian(b.detuning_mhz, b.bandwidth_mhz);
    return temporal_overlap(sa, sb);
}

std::complex<double> mode_overlap(const OpticalMode& a, const OpticalMode& b)
{
    return temporal_overlap(a.envelope, b.envelope) * spectral_overlap(a.spectrum, b.spectrum) *
           polarization_overlap(a.polarization, b.polarization);
}

}  // namespace homsim
