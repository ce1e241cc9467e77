#include "homsim/elements.hpp"

#include <cmath>

#include "homsim/error.hpp"

namespace homsim
{

namespace
{

void require(bool ok, const char* what)
{
    if (!ok)
        throw PreconditionError(what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

double PhaseModel::phase_at(double u) const
{
    if (kind == PhaseModelKind::UniformRandom)
        return 2.0 * std::numbers::pi * u;
    return amplitude_rad * std::sin(2.0 * std::numbers::pi * u);
}

void SourceConfig::validate() const
{
    require(pulse_fwhm_ns > 0.0, "source pulse fwhm must be positive");
    require(mean_photons >= 0.0 && std::isfinite(mean_photons), "mean photon number must be >= 0");
    require(eom_extinction_db >= 0.0, "EOM extinction must be >= 0 dB");
    require(is_probability(dop), "degree of polarization must lie in [0,1]");
    require(rep_rate_khz > 0.0, "repetition rate must be positive");
    require(phase.kind == PhaseModelKind::UniformRandom || phase.rate_khz > 0.0,
            "sine phase modulation rate must be positive");
}

void MemoryConfig::validate() const
{
    require(is_probability(eta_store_h) && is_probability(eta_store_v), "storage efficiencies must lie in [0,1]");
    require(is_probability(transmission), "memory transmission must lie in [0,1]");
    require(is_probability(output_coupling), "output coupling must lie in [0,1]");
    require(is_probability(leakage_fraction), "leakage fraction must lie in [0,1]");
    require(std::max(eta_store_h, eta_store_v) + leakage_fraction <= 1.0,
            "stored plus leaked fraction cannot exceed the input");
    require(storage_time_us >= 0.0, "storage time must be >= 0");
    require(retrieved_fwhm_ns > 0.0, "retrieved fwhm must be positive");
    require(eit_fwhm_mhz >= 0.0, "EIT bandwidth must be >= 0");
}

void NoiseModel::validate() const
{
    require(sbr > 0.0, "SBR must be positive");
    require(reference_roi_ns > 0.0, "reference ROI width must be positive");
    require(window_ns >= reference_roi_ns, "background window must cover the reference ROI");
}

void FilterConfig::validate() const
{
    for (const auto& e : etalons)
    {
        require(e.fwhm_mhz > 0.0, "etalon fwhm must be positive");
        require(e.fsr_ghz * 1e3 > e.fwhm_mhz, "etalon FSR must exceed its fwhm");
        require(e.insertion_loss_db >= 0.0, "etalon insertion loss must be >= 0 dB");
    }
}

void DetectorConfig::validate() const
{
    require(is_probability(efficiency), "detector efficiency must lie in [0,1]");
    require(jitter_sigma_ns >= 0.0, "jitter must be >= 0");
    require(resolution_ps >= 1.0, "time resolution must be at least 1 ps");
    require(dead_time_ns >= 0.0, "dead time must be >= 0");
    require(dark_rate_hz >= 0.0, "dark rate must be >= 0");
}

PolarizationState encode_qubit(QubitLevel level, const SourceConfig& cfg)
{
    const double s = std::numbers::sqrt2 / 2.0;
    Jones ideal;
    Jones orthogonal;
    switch (level)
    {
    case QubitLevel::L0:
        ideal = Jones(0.0, 1.0);
        orthogonal = Jones(1.0, 0.0);
        break;
    case QubitLevel::Lhalf:
        ideal = Jones(s, -s);
        orthogonal = Jones(s, s);
        break;
    case QubitLevel::Lpi:
        ideal = Jones(1.0, 0.0);
        orthogonal = Jones(0.0, 1.0);
        break;
    case QubitLevel::L3half:
        ideal = Jones(s, s);
        orthogonal = Jones(s, -s);
        break;
    }
    if (!(cfg.dop >= 0.0 && cfg.dop <= 1.0))
        throw PreconditionError("degree of polarization must lie in [0,1]");
    const double leak = std::isinf(cfg.eom_extinction_db) ? 0.0 : std::pow(10.0, -cfg.eom_extinction_db / 10.0);
    if (leak == 0.0)
        return PolarizationState{ideal, cfg.dop};
    return PolarizationState::from_jones(std::sqrt(1.0 - leak) * ideal + std::sqrt(leak) * orthogonal, cfg.dop);
}

PulseSpec make_pulse(const SourceConfig& cfg, QubitLevel level, double emit_time_ns)
{
    cfg.validate();
    PulseSpec p;
    p.mode.envelope = TemporalEnvelope::gaussian(emit_time_ns, cfg.pulse_fwhm_ns);
    p.mode.spectrum = SpectralMode{cfg.detuning_mhz, transform_limited_bandwidth_mhz(cfg.pulse_fwhm_ns)};
    p.mode.polarization = encode_qubit(level, cfg);
    p.mean_photons = cfg.mean_photons;
    p.phase = cfg.phase;
    return p;
}

double etalon_transmission(double detuning_mhz, const FilterConfig& cfg)
{
    cfg.validate();
    double t = 1.0;
    for (const auto& e : cfg.etalons)
    {
        const double fsr_mhz = e.fsr_ghz * 1e3;
        const double wrapped = detuning_mhz - fsr_mhz * std::round(detuning_mhz / fsr_mhz);
        const double x = 2.0 * wrapped / e.fwhm_mhz;
        t *= std::pow(10.0, -e.insertion_loss_db / 10.0) / (1.0 + x * x);
    }
    return t;
}

PolarizationState unequal_rail_distortion(const PolarizationState& in, double eta_h, double eta_v)
{
    if (!is_probability(eta_h) || !is_probability(eta_v))
        throw PreconditionError("rail efficiencies must lie in [0,1]");
    if (eta_h == 0.0 && eta_v == 0.0)
        throw PreconditionError("at least one rail must have non-zero efficiency");
    if (eta_h == eta_v)
        return in;
    const Jones scaled(in.jones(0) * std::sqrt(eta_h), in.jones(1) * std::sqrt(eta_v));
    return PolarizationState::from_jones(scaled, in.dop);
}

StorageResult store_and_retrieve(const PulseSpec& in, const MemoryConfig& mem, const NoiseModel& noise,
                                 double read_time_ns)
{
    mem.validate();
    noise.validate();
    const auto& env = in.mode.envelope;
    if (read_time_ns < env.center_ns + env.fwhm_ns)
        throw PreconditionError("read time precedes the end of the input pulse");

    const double path = mem.transmission * mem.output_coupling;
    const double pH = std::norm(in.mode.polarization.jones(0));
    const double pV = std::norm(in.mode.polarization.jones(1));
    const double stored = mem.eta_store_h * pH + mem.eta_store_v * pV;

    StorageResult out;
    out.retrieved.phase = in.phase;
    out.retrieved.mean_photons = in.mean_photons * stored * path;
    out.retrieved.mode.envelope = TemporalEnvelope::gaussian(read_time_ns, mem.retrieved_fwhm_ns);
    out.retrieved.mode.spectrum =
        SpectralMode{in.mode.spectrum.detuning_mhz, transform_limited_bandwidth_mhz(mem.retrieved_fwhm_ns)};
    out.retrieved.mode.polarization = stored > 0.0
                                          ? unequal_rail_distortion(in.mode.polarization, mem.eta_store_h,
                                                                    mem.eta_store_v)
                                          : in.mode.polarization;

    out.leakage.phase = in.phase;
    out.leakage.mean_photons = in.mean_photons * mem.leakage_fraction * path;
    out.leakage.mode.envelope =
        TemporalEnvelope::truncated_front(env.center_ns, env.fwhm_ns, env.center_ns + mem.leakage_cut_ns);
    out.leakage.mode.spectrum = in.mode.spectrum;
    out.leakage.mode.polarization = in.mode.polarization;

    const double half_ref = 0.5 * noise.reference_roi_ns;
    const double in_roi = out.retrieved.mean_photons *
                          out.retrieved.mode.envelope.fraction_in(read_time_ns - half_ref, read_time_ns + half_ref);
    out.background_mean_per_roi = std::isinf(noise.sbr) ? 0.0 : in_roi / noise.sbr;
    out.background_density_per_ns = out.background_mean_per_roi / noise.reference_roi_ns;
    out.background_window_start_ns = read_time_ns - 0.5 * noise.window_ns;
    out.background_window_end_ns = read_time_ns + 0.5 * noise.window_ns;
    return out;
}

}  // namespace homsim
