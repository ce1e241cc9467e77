#include "homsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "homsim/error.hpp"

#ifndef HOMSIM_DEFAULT_PRESET_DIR
#define HOMSIM_DEFAULT_PRESET_DIR "presets"
#endif

namespace homsim
{

namespace
{

/// Raised by value converters; rethrown as ParseError with line and key.
struct BadValue
{
    std::string message;
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_word(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

/// Unit implied by the key suffix ("pulse_fwhm_ns" -> "ns").
std::string key_unit(std::string_view key)
{
    static const std::vector<std::string> units{"ns", "us", "ps", "mhz", "ghz", "khz", "hz", "db", "deg", "rad"};
    const auto pos = key.rfind('_');
    if (pos == std::string_view::npos)
        return {};
    const std::string tail(key.substr(pos + 1));
    return std::find(units.begin(), units.end(), tail) != units.end() ? tail : std::string{};
}

/// Strips and checks an optional trailing unit token.
std::string_view strip_unit(std::string_view value, const std::string& unit)
{
    value = trim(value);
    const auto pos = value.find_last_of(" \t");
    if (pos == std::string_view::npos)
        return value;
    const auto token = value.substr(pos + 1);
    if (!is_word(token) || lower(token) == "inf")
        return value;
    if (unit.empty())
        throw BadValue{"unit violation: key takes a dimensionless value, got unit '" + std::string(token) + "'"};
    if (lower(token) != unit)
        throw BadValue{"unit violation: expected '" + unit + "', got '" + std::string(token) + "'"};
    return trim(value.substr(0, pos));
}

double to_number(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
        throw BadValue{"not a number: '" + std::string(s) + "'"};
    return v;
}

double number(std::string_view value, const std::string& unit) { return to_number(strip_unit(value, unit)); }

std::uint64_t integer(std::string_view value)
{
    value = trim(strip_unit(value, {}));
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec == std::errc{} && end == value.data() + value.size() && !value.empty())
        return v;
    // Allow 1e6-style integers.
    const double d = to_number(value);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19)
        throw BadValue{"not a non-negative integer: '" + std::string(value) + "'"};
    return static_cast<std::uint64_t>(d);
}

/// Comma-separated numbers or an inclusive start:stop:step range.
std::vector<double> number_list(std::string_view value, const std::string& unit)
{
    value = trim(value);
    std::vector<double> out;
    if (value.empty())
        return out;
    value = strip_unit(value, unit);
    if (value.find(':') != std::string_view::npos)
    {
        std::vector<double> parts;
        std::size_t start = 0;
        for (;;)
        {
            const auto pos = value.find(':', start);
            parts.push_back(to_number(value.substr(start, pos - start)));
            if (pos == std::string_view::npos)
                break;
            start = pos + 1;
        }
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
            throw BadValue{"range must be start:stop:step with step > 0 and stop >= start"};
        const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::size_t start = 0;
    for (;;)
    {
        const auto pos = value.find(',', start);
        out.push_back(to_number(value.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

bool boolean(std::string_view value)
{
    const auto v = lower(trim(value));
    if (v == "true" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "0")
        return false;
    throw BadValue{"expected true or false"};
}

std::string fmt(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + fmt(v[i]);
    return out;
}

template <typename E>
E enum_value(std::string_view value, const std::vector<std::pair<std::string, E>>& table)
{
    const auto v = lower(trim(value));
    for (const auto& [name, e] : table)
        if (v == name)
            return e;
    std::string names;
    for (const auto& [name, e] : table)
        names += (names.empty() ? "" : "|") + name;
    throw BadValue{"expected one of " + names};
}

template <typename E>
std::string enum_name(E e, const std::vector<std::pair<std::string, E>>& table)
{
    for (const auto& [name, v] : table)
        if (v == e)
            return name;
    return "?";
}

const std::vector<std::pair<std::string, QubitLevel>> kLevels{
    {"v", QubitLevel::L0}, {"a", QubitLevel::Lhalf}, {"h", QubitLevel::Lpi}, {"d", QubitLevel::L3half}};
const std::vector<std::pair<std::string, PhaseModelKind>> kPhases{{"uniform", PhaseModelKind::UniformRandom},
                                                                  {"sine", PhaseModelKind::SineScan}};
const std::vector<std::pair<std::string, ScanVariable>> kScans{{"none", ScanVariable::None},
                                                               {"polarization", ScanVariable::PolarizationAngle},
                                                               {"delay", ScanVariable::Delay}};
const std::vector<std::pair<std::string, RoiPolicy>> kPolicies{{"centered", RoiPolicy::Centered},
                                                               {"delay_pair", RoiPolicy::DelayPair}};
const std::vector<std::pair<std::string, RoiAnchor>> kAnchors{{"signal", RoiAnchor::Signal},
                                                              {"leakage", RoiAnchor::Leakage}};
const std::vector<std::pair<std::string, RunMode>> kModes{
    {"analytic", RunMode::Analytic}, {"mc", RunMode::MonteCarlo}, {"both", RunMode::Both}};

struct KeyDef
{
    std::string key;
    std::function<void(Scenario&, std::string_view value, const std::string& unit)> set;
    std::function<std::optional<std::string>(const Scenario&)> get;  // nullopt: omitted
};

class Registry
{
public:
    Registry() { build(); }

    const KeyDef* find(std::string_view key) const
    {
        const auto it = index_.find(std::string(key));
        return it == index_.end() ? nullptr : &defs_[it->second];
    }
    const std::vector<KeyDef>& all() const { return defs_; }

private:
    void add(std::string key, decltype(KeyDef::set) set, decltype(KeyDef::get) get)
    {
        index_[key] = defs_.size();
        defs_.push_back({std::move(key), std::move(set), std::move(get)});
    }

    /// Plain double field reached through `ref`.
    template <typename Ref>
    void num(const std::string& key, Ref ref)
    {
        add(key, [ref](Scenario& s, std::string_view v, const std::string& u) { ref(s) = number(v, u); },
            [ref](const Scenario& s) -> std::optional<std::string> { return fmt(ref(const_cast<Scenario&>(s))); });
    }

    /// Memory field; only present while the memory is enabled.
    template <typename Field>
    void mem(const std::string& key, std::size_t arm, Field field)
    {
        add(
            key,
            [arm, field, key](Scenario& s, std::string_view v, const std::string& u) {
                auto& m = s.arms[arm].memory;
                if (!m)
                    throw BadValue{"memory is disabled; set memory_" + std::string(arm ? "b" : "a") +
                                   ".enabled = true first"};
                (*m).*field = number(v, u);
            },
            [arm, field](const Scenario& s) -> std::optional<std::string> {
                const auto& m = s.arms[arm].memory;
                if (!m)
                    return std::nullopt;
                return fmt((*m).*field);
            });
    }

    void build()
    {
        add("name", [](Scenario& s, std::string_view v, const std::string&) { s.name = std::string(trim(v)); },
            [](const Scenario& s) -> std::optional<std::string> { return s.name; });

        for (std::size_t arm = 0; arm < 2; ++arm)
        {
            const std::string sfx = arm ? "b" : "a";
            const auto src = [arm](Scenario& s) -> SourceConfig& { return s.arms[arm].source; };
            const std::string sp = "source_" + sfx + ".";
            num(sp + "pulse_fwhm_ns", [src](Scenario& s) -> double& { return src(s).pulse_fwhm_ns; });
            num(sp + "mean_photons", [src](Scenario& s) -> double& { return src(s).mean_photons; });
            num(sp + "eom_extinction_db", [src](Scenario& s) -> double& { return src(s).eom_extinction_db; });
            num(sp + "dop", [src](Scenario& s) -> double& { return src(s).dop; });
            num(sp + "rep_rate_khz", [src](Scenario& s) -> double& { return src(s).rep_rate_khz; });
            num(sp + "detuning_mhz", [src](Scenario& s) -> double& { return src(s).detuning_mhz; });
            add(
                sp + "phase",
                [src](Scenario& s, std::string_view v, const std::string&) {
                    src(s).phase.kind = enum_value(v, kPhases);
                },
                [src](const Scenario& s) -> std::optional<std::string> {
                    return enum_name(src(const_cast<Scenario&>(s)).phase.kind, kPhases);
                });
            num(sp + "phase_rate_khz", [src](Scenario& s) -> double& { return src(s).phase.rate_khz; });
            num(sp + "phase_amplitude_rad", [src](Scenario& s) -> double& { return src(s).phase.amplitude_rad; });
            add(
                sp + "level",
                [arm](Scenario& s, std::string_view v, const std::string&) {
                    s.arms[arm].level = enum_value(v, kLevels);
                },
                [arm](const Scenario& s) -> std::optional<std::string> {
                    auto n = enum_name(s.arms[arm].level, kLevels);
                    n[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(n[0])));
                    return n;
                });
            num(sp + "emit_time_ns", [arm](Scenario& s) -> double& { return s.arms[arm].emit_time_ns; });
            num(sp + "arm_transmission", [arm](Scenario& s) -> double& { return s.arms[arm].arm_transmission; });

            const std::string mp = "memory_" + sfx + ".";
            add(
                mp + "enabled",
                [arm](Scenario& s, std::string_view v, const std::string&) {
                    auto& m = s.arms[arm].memory;
                    if (!boolean(v))
                        m.reset();
                    else if (!m)
                        m.emplace();
                },
                [arm](const Scenario& s) -> std::optional<std::string> {
                    return s.arms[arm].memory ? "true" : "false";
                });
            mem(mp + "eta_store_h", arm, &MemoryConfig::eta_store_h);
            mem(mp + "eta_store_v", arm, &MemoryConfig::eta_store_v);
            mem(mp + "transmission", arm, &MemoryConfig::transmission);
            mem(mp + "output_coupling", arm, &MemoryConfig::output_coupling);
            mem(mp + "storage_time_us", arm, &MemoryConfig::storage_time_us);
            mem(mp + "retrieved_fwhm_ns", arm, &MemoryConfig::retrieved_fwhm_ns);
            mem(mp + "leakage_fraction", arm, &MemoryConfig::leakage_fraction);
            mem(mp + "leakage_cut_ns", arm, &MemoryConfig::leakage_cut_ns);
            mem(mp + "eit_fwhm_mhz", arm, &MemoryConfig::eit_fwhm_mhz);

            const std::string np = "noise_" + sfx + ".";
            num(np + "sbr", [arm](Scenario& s) -> double& { return s.arms[arm].noise.sbr; });
            num(np + "reference_roi_ns", [arm](Scenario& s) -> double& { return s.arms[arm].noise.reference_roi_ns; });
            num(np + "window_ns", [arm](Scenario& s) -> double& { return s.arms[arm].noise.window_ns; });

            const std::string fp = "filter_" + sfx + ".";
            add(
                fp + "etalon_fwhm_mhz",
                [arm](Scenario& s, std::string_view v, const std::string& u) {
                    const auto widths = number_list(v, u);
                    auto& e = s.arms[arm].filter.etalons;
                    e.resize(widths.size());
                    for (std::size_t i = 0; i < widths.size(); ++i)
                        e[i].fwhm_mhz = widths[i];
                },
                [arm](const Scenario& s) -> std::optional<std::string> {
                    std::vector<double> v;
                    for (const auto& e : s.arms[arm].filter.etalons)
                        v.push_back(e.fwhm_mhz);
                    return fmt_list(v);
                });
            const auto etalon_field = [this, arm](const std::string& key, double Etalon::*field) {
                add(
                    key,
                    [arm, field](Scenario& s, std::string_view v, const std::string& u) {
                        const auto vals = number_list(v, u);
                        auto& e = s.arms[arm].filter.etalons;
                        if (vals.size() != e.size())
                            throw BadValue{"list length must match etalon_fwhm_mhz (" + std::to_string(e.size()) +
                                           " etalons)"};
                        for (std::size_t i = 0; i < vals.size(); ++i)
                            e[i].*field = vals[i];
                    },
                    [arm, field](const Scenario& s) -> std::optional<std::string> {
                        std::vector<double> v;
                        for (const auto& e : s.arms[arm].filter.etalons)
                            v.push_back(e.*field);
                        return fmt_list(v);
                    });
            };
            etalon_field(fp + "etalon_fsr_ghz", &Etalon::fsr_ghz);
            etalon_field(fp + "etalon_loss_db", &Etalon::insertion_loss_db);
            num(fp + "center_detuning_mhz",
                [arm](Scenario& s) -> double& { return s.arms[arm].filter.center_detuning_mhz; });
        }

        for (std::size_t d = 0; d < 2; ++d)
        {
            const std::string dp = "detector_" + std::to_string(d + 1) + ".";
            const auto det = [d](Scenario& s) -> DetectorConfig& { return s.detectors[d]; };
            num(dp + "efficiency", [det](Scenario& s) -> double& { return det(s).efficiency; });
            num(dp + "jitter_sigma_ns", [det](Scenario& s) -> double& { return det(s).jitter_sigma_ns; });
            num(dp + "resolution_ps", [det](Scenario& s) -> double& { return det(s).resolution_ps; });
            num(dp + "dead_time_ns", [det](Scenario& s) -> double& { return det(s).dead_time_ns; });
            num(dp + "dark_rate_hz", [det](Scenario& s) -> double& { return det(s).dark_rate_hz; });
        }

        add(
            "scan.variable",
            [](Scenario& s, std::string_view v, const std::string&) {
                const auto var = enum_value(v, kScans);
                if (var != s.scan)
                    s.grid.clear();
                s.scan = var;
            },
            [](const Scenario& s) -> std::optional<std::string> { return enum_name(s.scan, kScans); });
        const auto grid_key = [this](const std::string& key, ScanVariable var) {
            add(
                key,
                [var, key](Scenario& s, std::string_view v, const std::string& u) {
                    if (s.scan != var)
                        throw BadValue{key + " does not match scan.variable = " + enum_name(s.scan, kScans)};
                    s.grid = number_list(v, u);
                },
                [var](const Scenario& s) -> std::optional<std::string> {
                    if (s.scan != var)
                        return std::nullopt;
                    return fmt_list(s.grid);
                });
        };
        grid_key("scan.grid_deg", ScanVariable::PolarizationAngle);
        grid_key("scan.grid_ns", ScanVariable::Delay);

        add(
            "roi.policy",
            [](Scenario& s, std::string_view v, const std::string&) { s.roi.policy = enum_value(v, kPolicies); },
            [](const Scenario& s) -> std::optional<std::string> { return enum_name(s.roi.policy, kPolicies); });
        add(
            "roi.anchor",
            [](Scenario& s, std::string_view v, const std::string&) { s.roi.anchor = enum_value(v, kAnchors); },
            [](const Scenario& s) -> std::optional<std::string> { return enum_name(s.roi.anchor, kAnchors); });
        num("roi.width_ns", [](Scenario& s) -> double& { return s.roi.width_ns; });
        num("roi.offset_ns", [](Scenario& s) -> double& { return s.roi.offset_ns; });
        num("roi.window_ns", [](Scenario& s) -> double& { return s.roi.window_ns; });
        num("roi.total_ns", [](Scenario& s) -> double& { return s.roi.total_ns; });
        num("roi.filler_offset_ns", [](Scenario& s) -> double& { return s.roi.filler_offset_ns; });
        num("roi.sbr_probe_offset_ns", [](Scenario& s) -> double& { return s.roi.sbr_probe_offset_ns; });

        add(
            "mode", [](Scenario& s, std::string_view v, const std::string&) { s.mode = enum_value(v, kModes); },
            [](const Scenario& s) -> std::optional<std::string> { return enum_name(s.mode, kModes); });
        const auto int_key = [this](const std::string& key, std::uint64_t Scenario::*field) {
            add(
                key, [field](Scenario& s, std::string_view v, const std::string&) { s.*field = integer(v); },
                [field](const Scenario& s) -> std::optional<std::string> { return std::to_string(s.*field); });
        };
        int_key("n_triggers", &Scenario::n_triggers);
        int_key("master_seed", &Scenario::master_seed);
        int_key("trial_size", &Scenario::trial_size);
        num("imperfection", [](Scenario& s) -> double& { return s.imperfection; });
        add(
            "calibrate_visibility",
            [](Scenario& s, std::string_view v, const std::string& u) {
                if (lower(trim(v)) == "none")
                    s.calibrate_visibility.reset();
                else
                    s.calibrate_visibility = number(v, u);
            },
            [](const Scenario& s) -> std::optional<std::string> {
                return s.calibrate_visibility ? fmt(*s.calibrate_visibility) : "none";
            });
    }

    std::vector<KeyDef> defs_;
    std::map<std::string, std::size_t> index_;
};

const Registry& registry()
{
    static const Registry r;
    return r;
}

Scenario parse_impl(std::string_view text, int depth);

Scenario load_preset_impl(const std::string& name, int depth)
{
    if (depth > 8)
        throw ParseError(0, "base", "preset inheritance nested too deeply");
    if (name.empty() || name.find_first_of("/\\") != std::string::npos)
        throw ParseError(0, "base", "invalid preset name '" + name + "'");
    const auto path = preset_directory() / (name + ".scn");
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "base", "unknown preset '" + name + "' (looked in " + preset_directory().string() + ")");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_impl(ss.str(), depth + 1);
}

Scenario parse_impl(std::string_view text, int depth)
{
    Scenario s;
    std::size_t line_no = 0;
    std::size_t keys_set = 0;
    std::size_t pos = 0;
    while (pos <= text.size())
    {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "", "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));

        if (key == "base")
        {
            if (keys_set > 0)
                throw ParseError(line_no, key, "base must precede all other keys");
            try
            {
                s = load_preset_impl(std::string(value), depth);
            }
            catch (const ParseError& e)
            {
                throw ParseError(line_no, key, e.what());
            }
            ++keys_set;
            continue;
        }
        const KeyDef* def = registry().find(key);
        if (!def)
            throw ParseError(line_no, key, "unknown key");
        const bool list_key = key.find("etalon_") != std::string::npos;
        if (value.empty() && !list_key)
            throw ParseError(line_no, key, "missing value");
        try
        {
            def->set(s, value, key_unit(key));
        }
        catch (const BadValue& e)
        {
            throw ParseError(line_no, key, e.message);
        }
        ++keys_set;
    }
    if (keys_set == 0)
        throw ParseError(0, "", "scenario is empty; defaults alone are rejected");
    try
    {
        s.validate();
    }
    catch (const PreconditionError& e)
    {
        throw ParseError(0, "", std::string("invalid scenario: ") + e.what());
    }
    return s;
}

double arm_signal_peak(const ArmConfig& a)
{
    return a.memory ? a.emit_time_ns + a.memory->storage_time_us * 1e3 : a.emit_time_ns;
}

struct ArmBuild
{
    ArmField field;
    double signal_peak = 0.0;
    std::optional<double> leakage_peak;
};

ArmBuild build_arm(const ArmConfig& a, double delay_ns, double rotate_rad)
{
    ArmBuild out;
    // With a memory the delay acts on the read-out; the input and its
    // leakage stay put.
    const double emit_shift = a.memory ? 0.0 : delay_ns;
    PulseSpec pulse = make_pulse(a.source, a.level, a.emit_time_ns + emit_shift);
    pulse.mean_photons *= a.arm_transmission;
    const double ref_half = 0.5 * a.noise.reference_roi_ns;
    if (a.memory)
    {
        pulse.mean_photons *=
            etalon_transmission(pulse.mode.spectrum.detuning_mhz - a.filter.center_detuning_mhz, a.filter);
        const double read = arm_signal_peak(a) + delay_ns;
        const StorageResult r = store_and_retrieve(pulse, *a.memory, a.noise, read);
        out.field.pulses = {r.retrieved, r.leakage};
        out.field.background_density_per_ns = r.background_density_per_ns;
        out.field.background_window = {r.background_window_start_ns, r.background_window_end_ns};
        out.signal_peak = read - delay_ns;
        out.leakage_peak = r.leakage.mode.envelope.peak_ns();
    }
    else
    {
        a.noise.validate();
        const double c = pulse.mode.envelope.center_ns;
        if (!std::isinf(a.noise.sbr))
        {
            const double in_ref = pulse.mean_photons * pulse.mode.envelope.fraction_in(c - ref_half, c + ref_half);
            out.field.background_density_per_ns = in_ref / a.noise.sbr / a.noise.reference_roi_ns;
        }
        out.field.background_window = {c - 0.5 * a.noise.window_ns, c + 0.5 * a.noise.window_ns};
        out.field.pulses = {pulse};
        out.signal_peak = c - delay_ns;
    }
    if (rotate_rad != 0.0)
        for (auto& p : out.field.pulses)
            p.mode.polarization = p.mode.polarization.rotated(rotate_rad);
    return out;
}

void check_in_cycle(const RoiWindow& w, double period, const char* what)
{
    if (w.start_ns < 0.0 || w.end_ns > period)
        throw PreconditionError(std::string(what) + " [" + fmt(w.start_ns) + ", " + fmt(w.end_ns) +
                                ") ns lies outside the trigger cycle");
}

}  // namespace

void Scenario::validate() const
{
    for (const auto& a : arms)
    {
        a.source.validate();
        a.noise.validate();
        a.filter.validate();
        if (a.memory)
            a.memory->validate();
        if (!(a.arm_transmission >= 0.0 && a.arm_transmission <= 1.0))
            throw PreconditionError("arm transmission must lie in [0,1]");
        if (!(a.emit_time_ns >= 0.0))
            throw PreconditionError("emit time must be >= 0");
    }
    if (arms[0].source.rep_rate_khz != arms[1].source.rep_rate_khz)
        throw PreconditionError("both sources must share the repetition rate");
    for (const auto& d : detectors)
        d.validate();
    if (scan != ScanVariable::None && grid.empty())
        throw PreconditionError("scan grid must not be empty");
    if (scan == ScanVariable::None && !grid.empty())
        throw PreconditionError("scan grid given without a scan variable");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw PreconditionError("scan grid must be strictly increasing");
    if (n_triggers == 0)
        throw PreconditionError("n_triggers must be > 0");
    if (trial_size == 0)
        throw PreconditionError("trial_size must be > 0");
    if (!(imperfection >= 0.0 && imperfection <= 1.0))
        throw PreconditionError("imperfection must lie in [0,1]");
    if (calibrate_visibility && !(*calibrate_visibility > 0.0 && *calibrate_visibility < 1.0))
        throw PreconditionError("calibrate_visibility must lie in (0,1)");
    if (!(roi.width_ns > 0.0 && roi.window_ns > 0.0 && roi.total_ns > 0.0))
        throw PreconditionError("ROI widths must be positive");
    if (roi.anchor == RoiAnchor::Leakage && !(arms[0].memory && arms[1].memory))
        throw PreconditionError("a leakage-anchored ROI needs memories on both arms");
}

Scenario parse_scenario(std::string_view text) { return parse_impl(text, 0); }

Scenario parse_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(0, "", "cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string serialize(const Scenario& s)
{
    std::string out;
    for (const auto& def : registry().all())
        if (const auto v = def.get(s))
            out += def.key + " = " + *v + "\n";
    return out;
}

std::filesystem::path preset_directory()
{
    if (const char* env = std::getenv("HOMSIM_PRESET_DIR"); env && *env)
        return env;
    return HOMSIM_DEFAULT_PRESET_DIR;
}

Scenario load_preset(const std::string& name) { return load_preset_impl(name, 0); }

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(preset_directory(), ec))
        if (entry.path().extension() == ".scn")
            names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

PointSetup build_point(const Scenario& s, double control_value)
{
    s.validate();
    const double delay = s.scan == ScanVariable::Delay ? control_value : 0.0;
    const double rotation =
        s.scan == ScanVariable::PolarizationAngle ? control_value * std::numbers::pi / 180.0 : 0.0;

    // The later arm carries the delay: Alice for delay >= 0, Bob otherwise.
    const double lag_a = std::max(delay, 0.0);
    const double lag_b = std::max(-delay, 0.0);
    const ArmBuild a = build_arm(s.arms[0], lag_a, 0.0);
    const ArmBuild b = build_arm(s.arms[1], lag_b, rotation);

    PointSetup out;
    out.node.arm_a = a.field;
    out.node.arm_b = b.field;
    out.node.imperfection = s.imperfection;
    out.node.detectors = s.detectors;
    out.node.phase = s.arms[0].source.phase;
    out.node.trigger_period_ns = s.arms[0].source.trigger_period_ns();
    const double period = out.node.trigger_period_ns;

    const double anchor = s.roi.anchor == RoiAnchor::Leakage ? 0.5 * (*a.leakage_peak + *b.leakage_peak)
                                                             : 0.5 * (a.signal_peak + b.signal_peak);
    double reference_width = 0.0;
    if (s.roi.policy == RoiPolicy::Centered)
    {
        const double c = anchor + s.roi.offset_ns;
        out.sbr_signal = {c - 0.5 * s.roi.width_ns, c + 0.5 * s.roi.width_ns};
        check_in_cycle(out.sbr_signal, period, "ROI");
        out.roi = Roi({out.sbr_signal});
        reference_width = s.roi.width_ns;
    }
    else
    {
        DelayRoiBase base;
        const double c = anchor + lag_b + s.roi.offset_ns;
        base.signal = {c - 0.5 * s.roi.window_ns, c + 0.5 * s.roi.window_ns};
        base.filler_start_ns = c + s.roi.filler_offset_ns;
        base.cycle_ns = period;
        check_in_cycle(base.signal, period, "ROI");
        out.roi = shift_roi_for_delay(base, delay, s.roi.total_ns);
        out.sbr_signal = base.signal;
        reference_width = s.roi.total_ns;
    }
    out.sbr_background = {out.sbr_signal.start_ns + s.roi.sbr_probe_offset_ns,
                          out.sbr_signal.end_ns + s.roi.sbr_probe_offset_ns};
    check_in_cycle(out.sbr_background, period, "SBR probe window");

    // SBR of the whole ROI: signal in the reference window over background
    // spread across the full ROI width.
    const WindowMeans m = window_means(out.node, out.sbr_signal);
    const double scale = out.sbr_signal.width_ns() / reference_width;
    out.expected_sbr = m.background > 0.0 ? m.signal / m.background * scale
                                           : std::numeric_limits<double>::infinity();
    return out;
}

std::string to_string(ScanVariable v) { return enum_name(v, kScans); }
std::string to_string(RunMode m) { return enum_name(m, kModes); }

}  // namespace homsim
