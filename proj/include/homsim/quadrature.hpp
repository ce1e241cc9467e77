#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace homsim
{

/// Minimum number of nodes used by every fixed-step envelope integral.
inline constexpr std::size_t kMinQuadratureNodes = 2001;

/// Composite Simpson rule over [lo, hi], split at the given breakpoints so
/// that each piece is smooth. The total number of nodes is at least
/// `min_nodes`; nodes are shared out in proportion to piece length.
template <typename Scalar, typename F>
Scalar integrate_piecewise(F&& f, Scalar lo, Scalar hi, std::span<const Scalar> breaks = {},
                           std::size_t min_nodes = kMinQuadratureNodes)
{
    if (!(hi > lo))
        return Scalar(0);

    std::vector<Scalar> edges{lo};
    for (Scalar b : breaks)
        if (b > lo && b < hi)
            edges.push_back(b);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    const Scalar span = hi - lo;
    Scalar total(0);
    for (std::size_t piece = 0; piece + 1 < edges.size(); ++piece)
    {
        const Scalar a = edges[piece];
        const Scalar b = edges[piece + 1];
        auto intervals = static_cast<std::size_t>(
            std::ceil(static_cast<double>((b - a) / span) * static_cast<double>(min_nodes)));
        intervals = std::max<std::size_t>(intervals, 2);
        if (intervals % 2 != 0)
            ++intervals;
        const Scalar h = (b - a) / static_cast<Scalar>(intervals);
        Scalar sum = f(a) + f(b);
        for (std::size_t i = 1; i < intervals; ++i)
            sum += Scalar(i % 2 == 1 ? 4 : 2) * f(a + h * static_cast<Scalar>(i));
        total += sum * h / Scalar(3);
    }
    return total;
}

/// Periodic trapezoid rule over one period [0, 1) with `nodes` equally spaced
/// samples. Spectrally accurate for smooth periodic integrands.
template <typename Scalar, typename F>
Scalar average_periodic(F&& f, std::size_t nodes)
{
    Scalar sum(0);
    for (std::size_t i = 0; i < nodes; ++i)
        sum += f(static_cast<Scalar>(i) / static_cast<Scalar>(nodes));
    return sum / static_cast<Scalar>(nodes);
}

}  // namespace homsim
