#include "homsim/roi.hpp"

#include <algorithm>
#include <array>

#include "homsim/error.hpp"

namespace homsim
{

Roi::Roi(std::vector<RoiWindow> windows) : windows_(std::move(windows))
{
    if (windows_.empty())
        throw PreconditionError("ROI needs at least one window");
    std::sort(windows_.begin(), windows_.end(),
              [](const RoiWindow& a, const RoiWindow& b) { return a.start_ns < b.start_ns; });
    for (std::size_t i = 0; i < windows_.size(); ++i)
    {
        if (!(windows_[i].end_ns > windows_[i].start_ns))
            throw PreconditionError("ROI window must have positive width");
        if (i > 0 && windows_[i].start_ns < windows_[i - 1].end_ns)
            throw PreconditionError("ROI windows must be disjoint");
        total_width_ns_ += windows_[i].width_ns();
    }
}

bool Roi::contains(double t_ns) const
{
    return std::any_of(windows_.begin(), windows_.end(), [t_ns](const RoiWindow& w) { return w.contains(t_ns); });
}

CountSummary count_in_roi(std::span<const TimeTag> tags, const Roi& roi, std::uint64_t trigger_period_ps,
                          std::uint64_t n_triggers)
{
    if (trigger_period_ps == 0)
        throw PreconditionError("trigger period must be positive");
    CountSummary out;
    out.n_triggers = n_triggers;

    std::uint64_t cycle = 0;
    std::array<bool, 2> hit{false, false};
    const auto flush = [&] {
        out.c1 += hit[0];
        out.c2 += hit[1];
        out.c12 += hit[0] && hit[1];
        hit = {false, false};
    };
    for (const auto& tag : tags)
    {
        if (tag.channel > 1)
            continue;
        const std::uint64_t c = tag.time_ps / trigger_period_ps;
        if (c != cycle)
        {
            flush();
            cycle = c;
        }
        const double t_ns = static_cast<double>(tag.time_ps % trigger_period_ps) * 1e-3;
        if (roi.contains(t_ns))
            hit[tag.channel] = true;
    }
    flush();
    return out;
}

CountSummary count_in_roi(const TimeTagStream& stream, const Roi& roi)
{
    return count_in_roi(stream.tags, roi, stream.header.trigger_period_ps, stream.header.n_triggers);
}

Roi shift_roi_for_delay(const DelayRoiBase& base, double delay_ns, double total_width_ns)
{
    const RoiWindow fixed = base.signal;
    const RoiWindow moved{fixed.start_ns + delay_ns, fixed.end_ns + delay_ns};
    if (!(fixed.width_ns() > 0.0))
        throw PreconditionError("delay ROI signal window must have positive width");

    std::vector<RoiWindow> windows;
    if (moved.start_ns >= fixed.end_ns || fixed.start_ns >= moved.end_ns)
        windows = {fixed, moved};
    else
        windows = {RoiWindow{std::min(fixed.start_ns, moved.start_ns), std::max(fixed.end_ns, moved.end_ns)}};

    double used = 0.0;
    for (const auto& w : windows)
        used += w.width_ns();
    const double filler = total_width_ns - used;
    if (filler < -1e-9)
        throw PreconditionError("signal windows exceed the fixed total ROI width");
    if (filler > 1e-9)
    {
        const RoiWindow pad{base.filler_start_ns, base.filler_start_ns + filler};
        for (const auto& w : windows)
            if (pad.start_ns < w.end_ns && w.start_ns < pad.end_ns)
                throw PreconditionError("background filler window overlaps a signal window");
        windows.push_back(pad);
    }
    for (const auto& w : windows)
        if (w.start_ns < 0.0 || w.end_ns > base.cycle_ns)
            throw PreconditionError("ROI window exceeds the trigger cycle");
    return Roi(std::move(windows));
}

}  // namespace homsim
