#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "homsim/fit.hpp"
#include "homsim/hom.hpp"
#include "homsim/montecarlo.hpp"
#include "homsim/scenario.hpp"

namespace homsim
{

struct PointResult
{
    double control = 0.0;
    std::optional<CoincidenceProbabilities> analytic;
    std::optional<CountSummary> counts;
    double expected_sbr = 0.0;
};

struct RunReport
{
    Scenario scenario;  // as run, imperfection already calibrated
    std::vector<PointResult> points;
    std::optional<FitResult> analytic_fit;
    std::optional<FitResult> mc_fit;
    std::optional<double> analytic_visibility;  // fit V, or 1 - g without a scan
    std::optional<double> mc_visibility;
    std::optional<double> mc_visibility_sigma;
    double expected_sbr = 0.0;  // at the reference point (control closest to 0)
    std::optional<double> mc_sbr;
    std::optional<double> mc_sbr_lower_bound;  // set instead of mc_sbr when no background was seen
    double wall_clock_s = 0.0;                 // not part of the JSON export
    std::vector<TimeTagStream> streams;        // only with RunOptions::keep_streams
};

struct RunOptions
{
    McOptions mc;  // trial_size is taken from the scenario
    FitOptions fit;
    bool keep_streams = false;
};

/// Analytic probabilities for every grid point.
std::vector<PointResult> run_scan_analytic(const Scenario& s);

/// Visibility of the analytic scan: Asimov fit of the scan model at
/// n_triggers, or 1 - g when there is no scan.
double analytic_visibility(const Scenario& s);

/// Imperfection factor giving `target` analytic visibility (bisection).
double calibrate_imperfection(const Scenario& s, double target);

RunReport run(const Scenario& s, const RunOptions& options = {});

/// Byte-reproducible JSON: config echo, per-point results, fits, SBR, seed.
std::string report_json(const RunReport& r);
/// control_value,g,sigma; from MC counts when `mc`, else expected counts.
std::string curve_csv(const RunReport& r, bool mc);
/// control_value,c1,c2,c12,n with the first column named theta_deg or delay_ns.
std::string counts_csv(const RunReport& r);
/// {model, params, sigmas, loglik, n_points}
std::string fit_json(const FitResult& f);

enum class ExportFormat
{
    Csv,
    Json,
};

/// Writes `<name>.json` or the CSV curves/counts into `dir`, plus one
/// time-tag file per point when streams were kept.
std::vector<std::filesystem::path> write_artifacts(const RunReport& r, const std::filesystem::path& dir,
                                                   ExportFormat format);

}  // namespace homsim
