#include "homsim/node.hpp"

#include <algorithm>
#include <cmath>

#include "homsim/error.hpp"
#include "homsim/quadrature.hpp"

namespace homsim
{

namespace
{

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Probability that an event at t is recorded inside the ROI after jitter.
class RoiAcceptance
{
public:
    RoiAcceptance(const Roi& roi, double jitter_ns) : roi_(roi), jitter_(jitter_ns) {}

    double operator()(double t) const
    {
        if (jitter_ <= 0.0)
            return roi_.contains(t) ? 1.0 : 0.0;
        double w = 0.0;
        for (const auto& win : roi_.windows())
            w += normal_cdf((win.end_ns - t) / jitter_) - normal_cdf((win.start_ns - t) / jitter_);
        return w;
    }

    /// Interval outside which the acceptance is negligible.
    std::pair<double, double> reach() const
    {
        const double pad = 8.0 * jitter_;
        return {roi_.windows().front().start_ns - pad, roi_.windows().back().end_ns + pad};
    }

    std::vector<double> edges() const
    {
        std::vector<double> e;
        for (const auto& win : roi_.windows())
        {
            e.push_back(win.start_ns);
            e.push_back(win.end_ns);
        }
        return e;
    }

private:
    const Roi& roi_;
    double jitter_;
};

template <typename F>
double integrate_over(F&& f, std::pair<double, double> range, const RoiAcceptance& acc,
                      std::vector<double> breaks)
{
    const auto [r_lo, r_hi] = acc.reach();
    const double lo = std::max(range.first, r_lo);
    const double hi = std::min(range.second, r_hi);
    if (!(hi > lo))
        return 0.0;
    const auto e = acc.edges();
    breaks.insert(breaks.end(), e.begin(), e.end());
    return integrate_piecewise<double>([&](double t) { return acc(t) * f(t); }, lo, hi, breaks);
}

double arm_background(const ArmField& arm, const RoiAcceptance& acc)
{
    if (arm.background_density_per_ns <= 0.0)
        return 0.0;
    const auto& w = arm.background_window;
    return arm.background_density_per_ns *
           integrate_over([](double) { return 1.0; }, {w.start_ns, w.end_ns}, acc, {w.start_ns, w.end_ns});
}

}  // namespace

void NodeModel::validate() const
{
    for (const auto& d : detectors)
        d.validate();
    if (!(imperfection >= 0.0 && imperfection <= 1.0))
        throw PreconditionError("mode imperfection factor must lie in [0,1]");
    if (!(trigger_period_ns > 0.0))
        throw PreconditionError("trigger period must be positive");
    for (const auto* arm : {&arm_a, &arm_b})
    {
        if (arm->background_density_per_ns < 0.0)
            throw PreconditionError("background density must be >= 0");
        for (const auto& p : arm->pulses)
            if (!(p.mean_photons >= 0.0))
                throw PreconditionError("pulse mean photon number must be >= 0");
    }
}

std::complex<double> NodeModel::cross_factor(std::size_t j, std::size_t k) const
{
    const auto& a = arm_a.pulses.at(j).mode;
    const auto& b = arm_b.pulses.at(k).mode;
    return imperfection * spectral_overlap(a.spectrum, b.spectrum) *
           polarization_overlap(a.polarization, b.polarization);
}

HomInput evaluate_roi(const NodeModel& node, const Roi& roi)
{
    node.validate();
    const double jitter = 0.5 * (node.detectors[0].jitter_sigma_ns + node.detectors[1].jitter_sigma_ns);
    const RoiAcceptance acc(roi, jitter);

    const auto captured = [&](const PulseSpec& p) {
        if (p.mean_photons == 0.0)
            return 0.0;
        const auto& env = p.mode.envelope;
        return p.mean_photons *
               integrate_over([&](double t) { return env.intensity(t); }, env.support(), acc, env.breakpoints());
    };

    HomInput in;
    for (const auto& p : node.arm_a.pulses)
        in.mu_a += captured(p);
    for (const auto& p : node.arm_b.pulses)
        in.mu_b += captured(p);

    std::complex<double> cross = 0.0;
    for (std::size_t j = 0; j < node.arm_a.pulses.size(); ++j)
    {
        const auto& pa = node.arm_a.pulses[j];
        for (std::size_t k = 0; k < node.arm_b.pulses.size(); ++k)
        {
            const auto& pb = node.arm_b.pulses[k];
            if (pa.mean_photons == 0.0 || pb.mean_photons == 0.0)
                continue;
            const auto& ea = pa.mode.envelope;
            const auto& eb = pb.mode.envelope;
            const auto [a_lo, a_hi] = ea.support();
            const auto [b_lo, b_hi] = eb.support();
            auto breaks = ea.breakpoints();
            const auto more = eb.breakpoints();
            breaks.insert(breaks.end(), more.begin(), more.end());
            const double amp = integrate_over(
                [&](double t) { return std::sqrt(ea.intensity(t) * eb.intensity(t)); },
                {std::max(a_lo, b_lo), std::min(a_hi, b_hi)}, acc, breaks);
            cross += node.cross_factor(j, k) * std::sqrt(pa.mean_photons * pb.mean_photons) * amp;
        }
    }
    if (in.mu_a > 0.0 && in.mu_b > 0.0)
    {
        in.zeta = cross / std::sqrt(in.mu_a * in.mu_b);
        if (std::abs(in.zeta) > 1.0)
            in.zeta /= std::abs(in.zeta);
    }

    const double background = arm_background(node.arm_a, acc) + arm_background(node.arm_b, acc);
    in.eta1 = node.detectors[0].efficiency;
    in.eta2 = node.detectors[1].efficiency;
    in.b1 = in.eta1 * 0.5 * background + node.detectors[0].dark_rate_hz * roi.total_width_ns() * 1e-9;
    in.b2 = in.eta2 * 0.5 * background + node.detectors[1].dark_rate_hz * roi.total_width_ns() * 1e-9;
    return in;
}

WindowMeans window_means(const NodeModel& node, const RoiWindow& window)
{
    const Roi roi({window});
    const HomInput in = evaluate_roi(node, roi);
    WindowMeans out;
    out.signal = 0.5 * (in.eta1 + in.eta2) * (in.mu_a + in.mu_b);
    out.background = in.b1 + in.b2;
    return out;
}

}  // namespace homsim
