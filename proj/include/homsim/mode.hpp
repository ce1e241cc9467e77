#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace homsim
{

template <typename Scalar>
using JonesVector = Eigen::Matrix<std::complex<Scalar>, 2, 1>;
using Jones = JonesVector<double>;

template <typename Scalar>
using RotationMatrix = Eigen::Matrix<Scalar, 2, 2>;

/// Real rotation of the polarization plane by `angle` (radians).
template <typename Scalar>
RotationMatrix<Scalar> polarization_rotation(Scalar angle)
{
    RotationMatrix<Scalar> r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return r;
}

/// Linear polarization at `angle` from horizontal.
template <typename Scalar>
JonesVector<Scalar> linear_jones(Scalar angle)
{
    return JonesVector<Scalar>(std::complex<Scalar>(std::cos(angle)),
                               std::complex<Scalar>(std::sin(angle)));
}

/// <a|b>; Eigen's dot conjugates its left operand.
template <typename DerivedA, typename DerivedB>
auto jones_inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    return a.dot(b);
}

struct PolarizationState
{
    Jones jones = Jones(1.0, 0.0);  // (H, V), unit norm
    double dop = 1.0;

    /// Normalizes `j`; throws PreconditionError on a zero vector or dop outside [0,1].
    static PolarizationState from_jones(const Jones& j, double dop = 1.0);
    static PolarizationState horizontal(double dop = 1.0);
    static PolarizationState vertical(double dop = 1.0);
    static PolarizationState diagonal(double dop = 1.0);
    static PolarizationState antidiagonal(double dop = 1.0);
    static PolarizationState linear(double angle_rad, double dop = 1.0);

    /// State after a rotation of the polarization plane (wave-plate rotation).
    PolarizationState rotated(double angle_rad) const;

    bool operator==(const PolarizationState& other) const
    {
        return jones == other.jones && dop == other.dop;
    }
};

enum class EnvelopeShape
{
    Gaussian,
    TruncatedFront,
};

/// Unit-normalized intensity profile in time. TruncatedFront is a Gaussian
/// whose intensity is zero after `cut_ns`, renormalized to unit area.
struct TemporalEnvelope
{
    EnvelopeShape shape = EnvelopeShape::Gaussian;
    double center_ns = 0.0;
    double fwhm_ns = 1.0;
    double cut_ns = 0.0;  // absolute cut time, TruncatedFront only

    static TemporalEnvelope gaussian(double center_ns, double fwhm_ns);
    static TemporalEnvelope truncated_front(double center_ns, double fwhm_ns, double cut_ns);

    double sigma_ns() const { return fwhm_ns / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }
    /// Intensity density (1/ns) at t.
    double intensity(double t_ns) const;
    /// Integrated intensity over [a, b).
    double fraction_in(double a_ns, double b_ns) const;
    /// Time of maximum intensity.
    double peak_ns() const;
    /// Interval outside which the intensity is negligible (±6 sigma, cut applied).
    std::pair<double, double> support() const;
    /// Non-smooth points of the profile.
    std::vector<double> breakpoints() const;
    TemporalEnvelope shifted(double delay_ns) const;

    bool operator==(const TemporalEnvelope&) const = default;
};

/// Gaussian optical spectrum relative to the probe reference frequency.
struct SpectralMode
{
    double detuning_mhz = 0.0;
    double bandwidth_mhz = 0.0;  // intensity FWHM; 0 means monochromatic

    bool operator==(const SpectralMode&) const = default;
};

/// Transform-limited intensity FWHM bandwidth (MHz) of a Gaussian pulse.
double transform_limited_bandwidth_mhz(double pulse_fwhm_ns);

struct OpticalMode
{
    TemporalEnvelope envelope;
    SpectralMode spectrum;
    PolarizationState polarization;

    bool operator==(const OpticalMode&) const = default;
};

/// <a|b> scaled by sqrt(dop_a dop_b).
std::complex<double> polarization_overlap(const PolarizationState& a, const PolarizationState& b);

/// Amplitude overlap of sqrt-intensity envelopes.
std::complex<double> temporal_overlap(const TemporalEnvelope& a, const TemporalEnvelope& b);

/// Amplitude overlap of Gaussian spectra.
std::complex<double> spectral_overlap(const SpectralMode& a, const SpectralMode& b);

/// Separable overlap: temporal x spectral x polarization.
std::complex<double> mode_overlap(const OpticalMode& a, const OpticalMode& b);

/// Closed-form amplitude overlap of two Gaussian intensity profiles with
/// standard deviations `sigma_a`, `sigma_b` and centers `offset` apart.
template <typename Scalar>
Scalar gaussian_amplitude_overlap(Scalar offset, Scalar sigma_a, Scalar sigma_b)
{
    const Scalar s2 = sigma_a * sigma_a + sigma_b * sigma_b;
    return std::sqrt(Scalar(2) * sigma_a * sigma_b / s2) * std::exp(-offset * offset / (Scalar(4) * s2));
}

}  // namespace homsim
