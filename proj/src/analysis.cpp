#include "homsim/analysis.hpp"

#include <cmath>

#include "homsim/error.hpp"

namespace homsim
{

double normalized_rate(const CountSummary& cs)
{
    if (cs.c1 == 0 || cs.c2 == 0)
        throw PreconditionError("normalized rate needs non-zero singles on both detectors");
    return static_cast<double>(cs.n_triggers) * static_cast<double>(cs.c12) /
           (static_cast<double>(cs.c1) * static_cast<double>(cs.c2));
}

double normalized_rate_sigma(const CountSummary& cs)
{
    normalized_rate(cs);  // singles check
    return normalized_rate_sigma(static_cast<double>(cs.c1), static_cast<double>(cs.c2),
                                 static_cast<double>(cs.c12), static_cast<double>(cs.n_triggers));
}

double normalized_rate_sigma(double c1, double c2, double c12, double n)
{
    if (!(c1 > 0.0 && c2 > 0.0))
        throw PreconditionError("normalized rate needs non-zero singles on both detectors");
    const double g = n * c12 / (c1 * c2);
    const double n11 = c12;
    const double n10 = c1 - n11;
    const double n01 = c2 - n11;
    const double n00 = n - c1 - c2 + n11;

    // d ln g / d n_cell; the N term appears in every cell.
    if (n11 == 0.0)
        return n / (c1 * c2);  // one-count scale
    const double d11 = 1.0 / n11 - 1.0 / c1 - 1.0 / c2 + 1.0 / n;
    double var = n11 * d11 * d11;
    const double d10 = -1.0 / c1 + 1.0 / n;
    const double d01 = -1.0 / c2 + 1.0 / n;
    const double d00 = 1.0 / n;
    var += n10 * d10 * d10 + n01 * d01 * d01 + n00 * d00 * d00;
    return g * std::sqrt(var);
}

double estimate_sbr(const Histogram& hist, const RoiWindow& signal, const RoiWindow& background)
{
    if (!(signal.width_ns() > 0.0) || std::abs(signal.width_ns() - background.width_ns()) > 1e-6 * signal.width_ns())
        throw PreconditionError("SBR windows must have equal positive widths");
    if (signal.start_ns < background.end_ns && background.start_ns < signal.end_ns)
        throw PreconditionError("SBR windows must be disjoint");

    double s = 0.0;
    double b = 0.0;
    std::size_t s_bins = 0;
    std::size_t b_bins = 0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
    {
        const double t = hist.bin_center_ns(i);
        if (signal.contains(t))
        {
            s += static_cast<double>(hist.counts[i]);
            ++s_bins;
        }
        else if (background.contains(t))
        {
            b += static_cast<double>(hist.counts[i]);
            ++b_bins;
        }
    }
    if (s_bins == 0 || b_bins == 0)
        throw PreconditionError("SBR windows contain no histogram bins");
    // Normalize to counts per bin so unequal bin coverage cancels.
    const double s_rate = s / static_cast<double>(s_bins);
    const double b_rate = b / static_cast<double>(b_bins);
    if (b == 0.0)
        throw ZeroBackgroundError(std::max(s_rate * static_cast<double>(b_bins) - 1.0, 0.0));
    return (s_rate - b_rate) / b_rate;
}

double visibility_vs_sbr(double v_s, double sbr)
{
    if (!(sbr > 0.0))
        throw PreconditionError("SBR must be positive");
    if (std::isinf(sbr))
        return v_s;
    const double f = 1.0 + 1.0 / sbr;
    return v_s / (f * f);
}

bool mdiqkd_threshold_check(double v)
{
    if (!(v >= 0.0 && v <= 1.0))
        throw PreconditionError("visibility must lie in [0,1]");
    return v > kMdiQkdVisibilityThreshold;
}

}  // namespace homsim
