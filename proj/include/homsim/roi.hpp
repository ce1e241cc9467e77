#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "homsim/timetag.hpp"

namespace homsim
{

/// Half-open interval [start_ns, end_ns) within one trigger cycle.
struct RoiWindow
{
    double start_ns = 0.0;
    double end_ns = 0.0;

    double width_ns() const { return end_ns - start_ns; }
    bool contains(double t_ns) const { return t_ns >= start_ns && t_ns < end_ns; }
    bool operator==(const RoiWindow&) const = default;
};

/// Region of interest: disjoint windows, sorted by start time.
class Roi
{
public:
    Roi() = default;
    /// Throws PreconditionError on empty or overlapping windows.
    explicit Roi(std::vector<RoiWindow> windows);

    const std::vector<RoiWindow>& windows() const { return windows_; }
    double total_width_ns() const { return total_width_ns_; }
    bool contains(double t_ns) const;

    bool operator==(const Roi&) const = default;

private:
    std::vector<RoiWindow> windows_;
    double total_width_ns_ = 0.0;
};

struct CountSummary
{
    std::uint64_t c1 = 0;
    std::uint64_t c2 = 0;
    std::uint64_t c12 = 0;
    std::uint64_t n_triggers = 0;

    CountSummary& operator+=(const CountSummary& o)
    {
        c1 += o.c1;
        c2 += o.c2;
        c12 += o.c12;
        n_triggers += o.n_triggers;
        return *this;
    }
    bool operator==(const CountSummary&) const = default;
};

/// Per-cycle click indicators inside the ROI. Channel 0 is detector 1 and
/// channel 1 is detector 2; a coincidence is a cycle with at least one tag on
/// each. N is `n_triggers`.
CountSummary count_in_roi(std::span<const TimeTag> tags, const Roi& roi, std::uint64_t trigger_period_ps,
                          std::uint64_t n_triggers);
CountSummary count_in_roi(const TimeTagStream& stream, const Roi& roi);

/// Geometry of the delay-scan ROI. `signal` is the window that follows the
/// undelayed pulse; `filler_start_ns` is where background-only padding begins.
struct DelayRoiBase
{
    RoiWindow signal;
    double filler_start_ns = 0.0;
    double cycle_ns = 25'000.0;
};

/// Pair of signal windows, the second following the delayed pulse. When they
/// overlap the union shrinks and a background-only window is appended so the
/// total width stays `total_width_ns`.
Roi shift_roi_for_delay(const DelayRoiBase& base, double delay_ns, double total_width_ns);

}  // namespace homsim
