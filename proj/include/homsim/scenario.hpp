#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/elements.hpp"
#include "homsim/node.hpp"
#include "homsim/roi.hpp"

namespace homsim
{

enum class ScanVariable
{
    None,
    PolarizationAngle,  // rotation of Bob's polarization, degrees
    Delay,              // shift of Alice's pulse, ns
};

enum class RoiPolicy
{
    Centered,   // one window of width_ns centered on the anchor (+offset)
    DelayPair,  // per-arm windows of window_ns that follow the delay, padded to total_ns
};

enum class RoiAnchor
{
    Signal,   // retrieved pulse (or the source pulse without memory)
    Leakage,  // unstored leakage pulse
};

enum class RunMode
{
    Analytic,
    MonteCarlo,
    Both,
};

struct ArmConfig
{
    SourceConfig source;
    QubitLevel level = QubitLevel::Lpi;
    double emit_time_ns = 2000.0;
    double arm_transmission = 1.0;  // losses between source and memory (or beamsplitter)
    std::optional<MemoryConfig> memory;
    NoiseModel noise;
    FilterConfig filter;

    bool operator==(const ArmConfig&) const = default;
};

struct RoiSpec
{
    RoiPolicy policy = RoiPolicy::Centered;
    RoiAnchor anchor = RoiAnchor::Signal;
    double width_ns = 500.0;
    double offset_ns = 0.0;
    double window_ns = 300.0;
    double total_ns = 600.0;
    double filler_offset_ns = 2000.0;
    double sbr_probe_offset_ns = 2000.0;  // background-only probe window, relative to the ROI

    bool operator==(const RoiSpec&) const = default;
};

struct Scenario
{
    std::string name = "custom";
    std::array<ArmConfig, 2> arms;  // Alice, Bob
    std::array<DetectorConfig, 2> detectors;
    ScanVariable scan = ScanVariable::PolarizationAngle;
    std::vector<double> grid;
    RoiSpec roi;
    RunMode mode = RunMode::Both;
    std::uint64_t n_triggers = 100'000;
    std::uint64_t master_seed = 1;
    std::uint64_t trial_size = 50'000;
    double imperfection = 1.0;
    std::optional<double> calibrate_visibility;  // tune `imperfection` to this before running

    void validate() const;
    bool operator==(const Scenario&) const = default;
};

/// Parses scenario text. `base = <preset>` must come first and loads a preset
/// whose keys the remaining lines override.
Scenario parse_scenario(std::string_view text);
Scenario parse_scenario_file(const std::filesystem::path& path);

/// Full key = value listing; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& s);

/// Directory searched for presets: $HOMSIM_PRESET_DIR, else the install default.
std::filesystem::path preset_directory();
Scenario load_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Everything needed to evaluate one scan point.
struct PointSetup
{
    NodeModel node;
    Roi roi;
    RoiWindow sbr_signal;      // reference window for the SBR
    RoiWindow sbr_background;  // equal-width background-only probe
    double expected_sbr = 0.0;
};

PointSetup build_point(const Scenario& s, double control_value);

std::string to_string(ScanVariable v);
std::string to_string(RunMode m);

}  // namespace homsim
