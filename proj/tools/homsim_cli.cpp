// homsim: run HOM scenarios, reproduce the measured-visibility table, fit count curves, fold time tags.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "homsim/analysis.hpp"
#include "homsim/error.hpp"
#include "homsim/fit.hpp"
#include "homsim/run.hpp"
#include "homsim/scenario.hpp"
#include "homsim/table1.hpp"
#include "homsim/timetag.hpp"

namespace
{

constexpr int kExitParse = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitTable1 = 4;

struct Common
{
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> triggers;
    std::string mode;
    std::string out_dir;
    std::string format = "json";
    int bootstrap = 0;
    bool write_tags = false;
    unsigned threads = 0;
};

homsim::ExportFormat export_format(const std::string& f)
{
    return f == "csv" ? homsim::ExportFormat::Csv : homsim::ExportFormat::Json;
}

void print_summary(const homsim::RunReport& r)
{
    std::printf("scenario %s  (%zu points, %llu triggers/point, seed %llu, imperfection %.6f)\n",
                r.scenario.name.c_str(), r.points.size(), static_cast<unsigned long long>(r.scenario.n_triggers),
                static_cast<unsigned long long>(r.scenario.master_seed), r.scenario.imperfection);
    if (r.analytic_visibility)
    {
        std::printf("  analytic   V = %.4f", *r.analytic_visibility);
        if (r.analytic_fit)
            std::printf(" +- %.4f", r.analytic_fit->visibility_sigma());
        std::printf("\n");
    }
    if (r.mc_visibility)
        std::printf("  monte carlo V = %.4f +- %.4f\n", *r.mc_visibility, *r.mc_visibility_sigma);
    std::printf("  expected SBR %.3g", r.expected_sbr);
    if (r.mc_sbr)
        std::printf(", simulated SBR %.3g", *r.mc_sbr);
    if (r.mc_sbr_lower_bound)
        std::printf(", simulated SBR > %.3g", *r.mc_sbr_lower_bound);
    std::printf("\n  MDI-QKD threshold (V > 37%%): %s\n",
                homsim::mdiqkd_threshold_check(
                    std::clamp(r.mc_visibility.value_or(r.analytic_visibility.value_or(0.0)), 0.0, 1.0))
                    ? "above"
                    : "below");
    std::printf("  wall clock %.2f s\n", r.wall_clock_s);
}

int run_scenario(homsim::Scenario s, const Common& c)
{
    if (c.seed)
        s.master_seed = *c.seed;
    if (c.triggers)
        s.n_triggers = *c.triggers;
    if (c.mode == "analytic")
        s.mode = homsim::RunMode::Analytic;
    else if (c.mode == "mc")
        s.mode = homsim::RunMode::MonteCarlo;
    else if (c.mode == "both")
        s.mode = homsim::RunMode::Both;
    s.validate();

    homsim::RunOptions opt;
    opt.keep_streams = c.write_tags;
    opt.fit.bootstrap_resamples = c.bootstrap;
    opt.mc.threads = c.threads;
    const auto report = homsim::run(s, opt);
    print_summary(report);
    if (!c.out_dir.empty())
        for (const auto& p : homsim::write_artifacts(report, c.out_dir, export_format(c.format)))
            std::printf("  wrote %s\n", p.string().c_str());
    return 0;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
            cell.pop_back();
        while (!cell.empty() && cell.front() == ' ')
            cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

/// theta_deg|delay_ns,c1,c2,c12,n -> cos^2 or Gaussian dip; sbr,visibility,sigma -> the SBR law.
int fit_file(const std::string& path, const Common& c)
{
    std::ifstream in(path);
    if (!in)
        throw homsim::Error("cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#')
        {
            header = split_csv_line(line);
            break;
        }
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        for (const auto& cell : split_csv_line(line))
        {
            try
            {
                row.push_back(std::stod(cell));
            }
            catch (const std::exception&)
            {
                throw homsim::ParseError(line_no, cell, "not a number");
            }
        }
        if (row.size() != header.size())
            throw homsim::ParseError(line_no, "", "expected " + std::to_string(header.size()) + " columns");
        rows.push_back(row);
    }

    homsim::FitOptions opt;
    opt.bootstrap_resamples = c.bootstrap;
    if (c.seed)
        opt.seed = *c.seed;
    homsim::FitResult fit;
    if (header == std::vector<std::string>{"sbr", "visibility", "sigma"})
    {
        std::vector<homsim::SbrPoint> pts;
        for (const auto& r : rows)
            pts.push_back({r[0], r[1], r[2]});
        fit = homsim::fit_sbr_model(pts);
    }
    else if (header.size() == 5 && header[1] == "c1" && header[2] == "c2" && header[3] == "c12" && header[4] == "n")
    {
        std::vector<homsim::RatePoint> pts;
        for (const auto& r : rows)
            pts.push_back({r[0], r[1], r[2], r[3], r[4]});
        if (header[0] == "theta_deg")
            fit = homsim::fit_cos2(pts, opt);
        else if (header[0] == "delay_ns")
            fit = homsim::fit_gaussian_dip(pts, opt);
        else
            throw homsim::ParseError(1, header[0], "first column must be theta_deg or delay_ns");
    }
    else
        throw homsim::ParseError(1, "", "unrecognized header; expected theta_deg|delay_ns,c1,c2,c12,n or "
                                        "sbr,visibility,sigma");

    const std::string text = homsim::fit_json(fit) + "\n";
    std::fputs(text.c_str(), stdout);
    if (!c.out_dir.empty())
    {
        std::filesystem::create_directories(c.out_dir);
        const auto out = std::filesystem::path(c.out_dir) / "fit.json";
        std::ofstream(out) << text;
    }
    return 0;
}

int tags_to_histogram(const std::string& path, double bin_ns, const Common& c)
{
    const auto stream = homsim::read_stream_file(path);
    std::vector<homsim::Histogram> hists;
    for (std::size_t ch = 0; ch < stream.header.channel_labels.size(); ++ch)
        hists.push_back(homsim::fold_histogram(stream, static_cast<std::uint8_t>(ch), bin_ns));
    std::ostringstream out;
    out << "bin_center_ns";
    for (const auto& label : stream.header.channel_labels)
        out << ',' << label;
    out << '\n';
    for (std::size_t i = 0; i < hists.front().counts.size(); ++i)
    {
        out << hists.front().bin_center_ns(i);
        for (const auto& h : hists)
            out << ',' << h.counts[i];
        out << '\n';
    }
    if (c.out_dir.empty())
        std::cout << out.str();
    else
    {
        std::filesystem::create_directories(c.out_dir);
        const auto file = std::filesystem::path(c.out_dir) / (std::filesystem::path(path).stem().string() + "_hist.csv");
        std::ofstream(file) << out.str();
        std::printf("wrote %s\n", file.string().c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hong-Ou-Mandel interference simulator for weak coherent pulses and quantum memories"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--seed", c.seed, "master seed override");
    app.add_option("--triggers", c.triggers, "triggers per scan point");
    app.add_option("--mode", c.mode, "analytic|mc|both")->check(CLI::IsMember({"analytic", "mc", "both"}));
    app.add_option("--out", c.out_dir, "output directory");
    app.add_option("--format", c.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--bootstrap", c.bootstrap, "bootstrap resamples for fit errors (0: off)");
    app.add_option("--threads", c.threads, "worker threads for the Monte Carlo (0: all cores)");

    std::string file;
    auto* run_cmd = app.add_subcommand("run", "run a scenario file");
    run_cmd->add_option("file", file, "scenario file")->required();
    run_cmd->add_flag("--tags", c.write_tags, "also write one time-tag file per point");

    std::string preset;
    auto* preset_cmd = app.add_subcommand("preset", "run a bundled preset");
    preset_cmd->add_option("name", preset, "preset name")->required();
    preset_cmd->add_flag("--tags", c.write_tags, "also write one time-tag file per point");
    bool show = false;
    preset_cmd->add_flag("--show", show, "print the expanded scenario instead of running it");

    auto* list_cmd = app.add_subcommand("presets", "list bundled presets");

    auto* table_cmd = app.add_subcommand("table1", "reproduce the measured-visibility table with tolerances");

    std::string csv;
    auto* fit_cmd = app.add_subcommand("fit", "fit a counts CSV or an (sbr, visibility, sigma) CSV");
    fit_cmd->add_option("csv", csv, "input CSV")->required();

    std::string tags;
    double bin_ns = 10.0;
    auto* hist_cmd = app.add_subcommand("tags2hist", "fold a time-tag file into per-channel histograms");
    hist_cmd->add_option("file", tags, "time-tag file (.htt binary or .csv)")->required();
    hist_cmd->add_option("--bin-ns", bin_ns, "histogram bin width in ns");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try
    {
        if (*run_cmd)
            return run_scenario(homsim::parse_scenario_file(file), c);
        if (*preset_cmd)
        {
            const auto s = homsim::load_preset(preset);
            if (show)
            {
                std::fputs(homsim::serialize(s).c_str(), stdout);
                return 0;
            }
            return run_scenario(s, c);
        }
        if (*list_cmd)
        {
            for (const auto& n : homsim::preset_names())
                std::printf("%s\n", n.c_str());
            return 0;
        }
        if (*table_cmd)
        {
            const auto rep = homsim::table1_suite();
            const auto text = homsim::format_table1(rep);
            std::fputs(text.c_str(), stdout);
            if (!c.out_dir.empty())
            {
                std::filesystem::create_directories(c.out_dir);
                std::ofstream(std::filesystem::path(c.out_dir) / "table1.txt") << text;
            }
            return rep.all_pass ? 0 : kExitTable1;
        }
        if (*fit_cmd)
            return fit_file(csv, c);
        if (*hist_cmd)
            return tags_to_histogram(tags, bin_ns, c);
    }
    catch (const homsim::ParseError& e)
    {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitParse;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
