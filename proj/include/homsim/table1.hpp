#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homsim/fit.hpp"

namespace homsim
{

struct Table1Row
{
    std::string config;  // "No memories", "Dual-rail", "Single-rail", "Dual-rail (predicted)"
    double mean_photons = 0.0;
    std::string dof;     // "pol" or "delay"
    double roi_us = 0.0;
    double measured_v = 0.0;
    double measured_sigma = 0.0;
    std::optional<double> measured_sbr;  // absent where the table gives only an order of magnitude

    std::optional<double> law_v;        // V_s / (1 + 1/SBR)^2 at the measured SBR, V_s = 0.45
    std::optional<double> reference_v;  // weak balanced reference node at the measured SBR
    std::optional<double> engine_v;     // the row's preset through the full analytic pipeline
    std::optional<double> engine_sbr;

    bool included = true;  // counted towards pass/fail
    bool pass = false;
    std::string note;
};

struct Table1Report
{
    std::vector<Table1Row> rows;
    FitResult vs_fit;  // SBR-law fit to the measured memory rows
    double source_visibility = 0.45;
    bool all_pass = false;
};

/// Runs every row of the measured-visibility table from the installed presets.
Table1Report table1_suite();

/// Fixed-width text rendering of the report.
std::string format_table1(const Table1Report& r);

}  // namespace homsim
