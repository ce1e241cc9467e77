#pragma once

#include "homsim/roi.hpp"
#include "homsim/timetag.hpp"

namespace homsim
{

/// N c12 / (c1 c2). Throws PreconditionError when either singles count is 0.
double normalized_rate(const CountSummary& cs);

/// Delta-method standard deviation of normalized_rate, treating the four
/// per-cycle outcomes (both, only 1, only 2, neither) as multinomial.
double normalized_rate_sigma(const CountSummary& cs);
/// Same, for expected (non-integer) counts.
double normalized_rate_sigma(double c1, double c2, double c12, double n);

/// Thrown by estimate_sbr when the background window is empty.
class ZeroBackgroundError : public Error
{
public:
    explicit ZeroBackgroundError(double lower_bound)
        : Error("no background counts; SBR is only bounded from below"), lower_bound_(lower_bound)
    {
    }
    /// SBR obtained by assuming a single background count.
    double lower_bound() const noexcept { return lower_bound_; }

private:
    double lower_bound_;
};

/// (S - B) / B from width-normalized counts of bins centered in each window.
/// The windows must be disjoint and of equal width.
double estimate_sbr(const Histogram& hist, const RoiWindow& signal, const RoiWindow& background);

/// v_s / (1 + 1/sbr)^2; sbr may be +inf.
double visibility_vs_sbr(double v_s, double sbr);

/// Minimum HOM visibility for a positive MDI-QKD key rate.
inline constexpr double kMdiQkdVisibilityThreshold = 0.37;

/// True iff v exceeds the threshold strictly.
bool mdiqkd_threshold_check(double v);

}  // namespace homsim
