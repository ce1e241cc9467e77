#pragma once

#include <array>
#include <vector>

#include "homsim/elements.hpp"
#include "homsim/hom.hpp"
#include "homsim/roi.hpp"

namespace homsim
{

/// Everything one arm delivers to the beamsplitter during a trigger cycle.
struct ArmField
{
    std::vector<PulseSpec> pulses;             // mean photons at the beamsplitter input
    double background_density_per_ns = 0.0;    // background photons per ns, flat
    RoiWindow background_window;               // where the flat background lives
};

/// The interference node as seen by the detectors for one scan point.
struct NodeModel
{
    ArmField arm_a;
    ArmField arm_b;
    double imperfection = 1.0;  // scalar on |zeta| for unmodeled spatial mismatch
    std::array<DetectorConfig, 2> detectors;
    PhaseModel phase;
    double trigger_period_ns = 25'000.0;

    void validate() const;

    /// Non-temporal overlap (spectral x polarization x imperfection) of
    /// pulse j of arm A with pulse k of arm B.
    std::complex<double> cross_factor(std::size_t j, std::size_t k) const;
};

/// ROI-restricted interference inputs. Window edges are smeared by the
/// detector timing jitter (mean of the two detectors), so the result is the
/// exact expectation of what count_in_roi sees on simulated tags.
HomInput evaluate_roi(const NodeModel& node, const Roi& roi);

/// Expected detector-summed signal and background means inside `window`.
struct WindowMeans
{
    double signal = 0.0;
    double background = 0.0;
};
WindowMeans window_means(const NodeModel& node, const RoiWindow& window);

}  // namespace homsim
