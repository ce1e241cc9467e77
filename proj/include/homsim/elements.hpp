#pragma once

#include <limits>
#include <numbers>
#include <vector>

#include "homsim/mode.hpp"

namespace homsim
{

/// EOM drive levels {0, Vpi/2, Vpi, 3Vpi/2}.
enum class QubitLevel
{
    L0,      // |V>
    Lhalf,   // |A>
    Lpi,     // |H>
    L3half,  // |D>
};

enum class PhaseModelKind
{
    UniformRandom,
    SineScan,
};

/// Relative optical phase between the two sources, sampled once per trigger.
struct PhaseModel
{
    PhaseModelKind kind = PhaseModelKind::UniformRandom;
    double rate_khz = 1.0;                       // SineScan modulation frequency
    double amplitude_rad = std::numbers::pi;     // SineScan peak phase excursion

    /// Phase at fraction `u` in [0,1) of the sampling cycle (a uniform draw
    /// for UniformRandom, a fraction of the modulation period for SineScan).
    double phase_at(double u) const;

    bool operator==(const PhaseModel&) const = default;
};

struct SourceConfig
{
    double pulse_fwhm_ns = 400.0;
    double mean_photons = 0.4;
    PhaseModel phase;
    double eom_extinction_db = std::numeric_limits<double>::infinity();
    double dop = 1.0;
    double rep_rate_khz = 40.0;
    double detuning_mhz = -320.0;

    void validate() const;
    double trigger_period_ns() const { return 1e6 / rep_rate_khz; }
    bool operator==(const SourceConfig&) const = default;
};

/// Weak coherent pulse: an optical mode with a Poisson mean photon number.
struct PulseSpec
{
    OpticalMode mode;
    double mean_photons = 0.0;
    PhaseModel phase;

    bool operator==(const PulseSpec&) const = default;
};

struct MemoryConfig
{
    double eta_store_h = 0.2;
    double eta_store_v = 0.2;
    double transmission = 0.03;     // passive transmission without storage
    double output_coupling = 1.0;   // fiber coupling towards the measurement station
    double storage_time_us = 1.0;
    double retrieved_fwhm_ns = 400.0;
    double leakage_fraction = 0.3;  // of the input leaving in the leakage window
    double leakage_cut_ns = 0.0;    // leakage truncation time relative to the input center
    double eit_fwhm_mhz = 1.0;

    void validate() const;
    bool operator==(const MemoryConfig&) const = default;
};

/// Phenomenological background: flat in time over `window_ns` centered on the
/// retrieved pulse, scaled so that the centered reference ROI has the given SBR.
struct NoiseModel
{
    double sbr = std::numeric_limits<double>::infinity();
    double reference_roi_ns = 500.0;
    double window_ns = 6000.0;

    void validate() const;
    bool operator==(const NoiseModel&) const = default;
};

struct Etalon
{
    double fwhm_mhz = 22.1;
    double fsr_ghz = 13.6;
    double insertion_loss_db = 0.0;

    bool operator==(const Etalon&) const = default;
};

struct FilterConfig
{
    std::vector<Etalon> etalons;
    double center_detuning_mhz = -320.0;  // frequency the stack is tuned to

    void validate() const;
    bool operator==(const FilterConfig&) const = default;
};

struct DetectorConfig
{
    double efficiency = 0.65;
    double jitter_sigma_ns = 10.0;
    double resolution_ps = 100.0;
    double dead_time_ns = 0.0;
    double dark_rate_hz = 0.0;

    void validate() const;
    bool operator==(const DetectorConfig&) const = default;
};

/// Polarization produced by the EOM at `level`, including finite extinction
/// (power fraction 10^(-dB/10) in the orthogonal state) and the source dop.
PolarizationState encode_qubit(QubitLevel level, const SourceConfig& cfg);

/// Gaussian weak coherent pulse emitted at `emit_time_ns`.
PulseSpec make_pulse(const SourceConfig& cfg, QubitLevel level, double emit_time_ns);

/// Transmission of the etalon cascade at `detuning_mhz` from its tuning point.
double etalon_transmission(double detuning_mhz, const FilterConfig& cfg);

struct StorageResult
{
    PulseSpec retrieved;
    PulseSpec leakage;
    double background_mean_per_roi = 0.0;  // photons in the reference ROI
    double background_density_per_ns = 0.0;
    double background_window_start_ns = 0.0;
    double background_window_end_ns = 0.0;
};

/// Dual-rail EIT storage: per-rail efficiency, passive transmission, leakage
/// of the unstored part and the SBR-defined background around the read-out.
StorageResult store_and_retrieve(const PulseSpec& in, const MemoryConfig& mem, const NoiseModel& noise,
                                 double read_time_ns);

/// Jones components scaled by sqrt(eta) per rail and renormalized.
PolarizationState unequal_rail_distortion(const PolarizationState& in, double eta_h, double eta_v);

}  // namespace homsim
