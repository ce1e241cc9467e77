#include "homsim/hom.hpp"

#include <cmath>

#include "homsim/error.hpp"

namespace homsim
{

void HomInput::validate() const
{
    if (!(mu_a >= 0.0 && mu_b >= 0.0))
        throw PreconditionError("mean photon numbers must be >= 0");
    if (std::abs(zeta) > 1.0 + 1e-12)
        throw PreconditionError("mode overlap magnitude must not exceed 1");
    if (!(eta1 >= 0.0 && eta1 <= 1.0 && eta2 >= 0.0 && eta2 <= 1.0))
        throw PreconditionError("detector efficiencies must lie in [0,1]");
    if (!(b1 >= 0.0 && b2 >= 0.0))
        throw PreconditionError("background means must be >= 0");
}

CoincidenceProbabilities analytic_hom(const HomInput& in, const PhaseModel& phase, std::size_t nodes)
{
    in.validate();
    const double mean = 0.5 * (in.mu_a + in.mu_b);
    const double cross = std::sqrt(in.mu_a * in.mu_b);

    double p1 = 0.0;
    double p2 = 0.0;
    double p12 = 0.0;
    for (std::size_t i = 0; i < nodes; ++i)
    {
        const double phi = phase.phase_at(static_cast<double>(i) / static_cast<double>(nodes));
        // Re(zeta e^{i phi}) sqrt(mu_a mu_b): the interference term.
        const double beat = cross * std::real(in.zeta * std::polar(1.0, phi));
        const double mu1 = mean + beat;
        const double mu2 = mean - beat;
        const double c1 = -std::expm1(-in.eta1 * mu1 - in.b1);
        const double c2 = -std::expm1(-in.eta2 * mu2 - in.b2);
        p1 += c1;
        p2 += c2;
        p12 += c1 * c2;
    }
    const auto n = static_cast<double>(nodes);
    CoincidenceProbabilities out{p1 / n, p2 / n, p12 / n, 1.0};
    out.g = (out.p1 > 0.0 && out.p2 > 0.0) ? out.p12 / (out.p1 * out.p2) : 1.0;
    return out;
}

double hom_visibility(const HomInput& in, const PhaseModel& phase)
{
    HomInput baseline = in;
    baseline.zeta = 0.0;
    return 1.0 - analytic_hom(in, phase).g / analytic_hom(baseline, phase).g;
}

}  // namespace homsim
