#pragma once

#include <complex>
#include <cstddef>

#include "homsim/elements.hpp"

namespace homsim
{

/// Inputs to the two-port interference node, all means taken over the
/// evaluation window. Detector efficiency multiplies the signal means only;
/// b1, b2 are already detector-side (background and darks).
struct HomInput
{
    double mu_a = 0.0;
    double mu_b = 0.0;
    std::complex<double> zeta = 0.0;
    double eta1 = 1.0;
    double eta2 = 1.0;
    double b1 = 0.0;
    double b2 = 0.0;

    void validate() const;
};

/// Per-trigger single and coincidence click probabilities.
struct CoincidenceProbabilities
{
    double p1 = 0.0;
    double p2 = 0.0;
    double p12 = 0.0;
    double g = 1.0;  // p12 / (p1 p2)
};

inline constexpr std::size_t kPhaseNodes = 512;

/// Threshold-detector click statistics of two phase-randomized coherent
/// states on a 50:50 beamsplitter. The outputs are Poissonian and
/// conditionally independent given the relative phase, which is averaged
/// with a periodic trapezoid rule.
CoincidenceProbabilities analytic_hom(const HomInput& in, const PhaseModel& phase = {},
                                      std::size_t nodes = kPhaseNodes);

/// 1 - g(in) / g(in with zeta = 0).
double hom_visibility(const HomInput& in, const PhaseModel& phase = {});

}  // namespace homsim
