#include "homsim/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homsim/analysis.hpp"
#include "homsim/error.hpp"

namespace homsim
{

namespace
{

using Json = nlohmann::ordered_json;

std::vector<double> controls(const Scenario& s)
{
    return s.scan == ScanVariable::None ? std::vector<double>{0.0} : s.grid;
}

std::size_t reference_index(const std::vector<double>& xs)
{
    return static_cast<std::size_t>(
        std::min_element(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
        xs.begin());
}

std::vector<RatePoint> asimov_points(const std::vector<PointResult>& pts, double n)
{
    std::vector<RatePoint> out;
    for (const auto& p : pts)
        out.push_back(RatePoint{p.control, n * p.analytic->p1, n * p.analytic->p2, n * p.analytic->p12, n});
    return out;
}

FitResult fit_scan(ScanVariable v, const std::vector<RatePoint>& pts, const FitOptions& opt)
{
    return v == ScanVariable::PolarizationAngle ? fit_cos2(pts, opt) : fit_gaussian_dip(pts, opt);
}

double histogram_bin_ns(double period_ns)
{
    return period_ns / std::max(1.0, std::round(period_ns / 10.0));
}

Json fit_record(const FitResult& f)
{
    Json j;
    j["model"] = model_name(f.model);
    Json params = Json::object();
    for (const auto& [k, v] : model_parameters(f.model))
        params[k] = v;
    Json sigmas = Json::object();
    for (const auto& [k, v] : model_parameters(f.sigma))
        sigmas[k] = v;
    j["params"] = params;
    j["sigmas"] = sigmas;
    if (f.bootstrap)
    {
        Json boot = Json::object();
        for (const auto& [k, v] : model_parameters(*f.bootstrap))
            boot[k] = v;
        j["bootstrap_sigmas"] = boot;
    }
    j["loglik"] = f.loglik;
    j["n_points"] = f.n_points;
    return j;
}

Json finite_or_string(double v)
{
    return std::isfinite(v) ? Json(v) : Json(v > 0 ? "inf" : "nan");
}

}  // namespace

std::vector<PointResult> run_scan_analytic(const Scenario& s)
{
    std::vector<PointResult> out;
    for (double x : controls(s))
    {
        const PointSetup setup = build_point(s, x);
        PointResult p;
        p.control = x;
        p.analytic = analytic_hom(evaluate_roi(setup.node, setup.roi), setup.node.phase);
        p.expected_sbr = setup.expected_sbr;
        out.push_back(p);
    }
    return out;
}

double analytic_visibility(const Scenario& s)
{
    const auto pts = run_scan_analytic(s);
    if (s.scan == ScanVariable::None)
        return 1.0 - pts.front().analytic->g;
    return fit_scan(s.scan, asimov_points(pts, static_cast<double>(s.n_triggers)), {}).visibility();
}

double calibrate_imperfection(const Scenario& s, double target)
{
    Scenario trial = s;
    trial.calibrate_visibility.reset();
    const auto v_at = [&](double imp) {
        trial.imperfection = imp;
        return analytic_visibility(trial);
    };
    double lo = 0.0;
    double hi = 1.0;
    const double v_hi = v_at(hi);
    if (target > v_hi)
        throw PreconditionError("calibration target " + std::to_string(target) +
                                " exceeds the visibility reachable with perfect overlap (" + std::to_string(v_hi) +
                                ")");
    for (int i = 0; i < 48 && hi - lo > 1e-12; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        (v_at(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RunReport run(const Scenario& input, const RunOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    input.validate();
    RunReport r;
    r.scenario = input;
    if (input.calibrate_visibility)
    {
        r.scenario.imperfection = calibrate_imperfection(input, *input.calibrate_visibility);
        r.scenario.calibrate_visibility.reset();
    }
    const Scenario& s = r.scenario;
    const bool want_analytic = s.mode != RunMode::MonteCarlo;
    const bool want_mc = s.mode != RunMode::Analytic;
    const auto xs = controls(s);
    const std::size_t ref = reference_index(xs);
    const auto n = static_cast<double>(s.n_triggers);

    McOptions mc = options.mc;
    mc.trial_size = s.trial_size;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const PointSetup setup = build_point(s, xs[i]);
        PointResult p;
        p.control = xs[i];
        p.expected_sbr = setup.expected_sbr;
        if (want_analytic)
            p.analytic = analytic_hom(evaluate_roi(setup.node, setup.roi), setup.node.phase);
        if (want_mc)
        {
            TimeTagStream stream = simulate_stream(setup.node, s.master_seed, i, s.n_triggers, mc);
            p.counts = count_in_roi(stream, setup.roi);
            if (i == ref)
            {
                const double bin = histogram_bin_ns(setup.node.trigger_period_ns);
                Histogram h = fold_histogram(stream, 0, bin);
                const Histogram h2 = fold_histogram(stream, 1, bin);
                for (std::size_t k = 0; k < h.counts.size(); ++k)
                    h.counts[k] += h2.counts[k];
                const double scale = setup.sbr_signal.width_ns() /
                                     (s.roi.policy == RoiPolicy::Centered ? s.roi.width_ns : s.roi.total_ns);
                try
                {
                    r.mc_sbr = estimate_sbr(h, setup.sbr_signal, setup.sbr_background) * scale;
                }
                catch (const ZeroBackgroundError& e)
                {
                    r.mc_sbr_lower_bound = e.lower_bound() * scale;
                }
            }
            if (options.keep_streams)
                r.streams.push_back(std::move(stream));
        }
        r.points.push_back(p);
    }
    r.expected_sbr = r.points[ref].expected_sbr;

    if (want_analytic)
    {
        if (s.scan == ScanVariable::None)
            r.analytic_visibility = 1.0 - r.points.front().analytic->g;
        else
        {
            FitOptions opt = options.fit;
            opt.bootstrap_resamples = 0;
            r.analytic_fit = fit_scan(s.scan, asimov_points(r.points, n), opt);
            r.analytic_visibility = r.analytic_fit->visibility();
        }
    }
    if (want_mc)
    {
        if (s.scan == ScanVariable::None)
        {
            const auto& cs = *r.points.front().counts;
            r.mc_visibility = 1.0 - normalized_rate(cs);
            r.mc_visibility_sigma = normalized_rate_sigma(cs);
        }
        else
        {
            std::vector<RatePoint> pts;
            for (const auto& p : r.points)
                pts.push_back(RatePoint::from_counts(p.control, *p.counts));
            try
            {
                r.mc_fit = fit_scan(s.scan, pts, options.fit);
            }
            catch (const Error& e)
            {
                throw Error("scenario '" + s.name + "': fit of simulated counts failed: " + e.what());
            }
            r.mc_visibility = r.mc_fit->visibility();
            r.mc_visibility_sigma = r.mc_fit->visibility_sigma();
        }
    }
    r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::string fit_json(const FitResult& f) { return fit_record(f).dump(2); }

std::string report_json(const RunReport& r)
{
    Json j;
    j["scenario"] = r.scenario.name;
    j["master_seed"] = r.scenario.master_seed;
    j["n_triggers"] = r.scenario.n_triggers;
    j["mode"] = to_string(r.scenario.mode);
    j["scan"] = to_string(r.scenario.scan);
    j["imperfection"] = r.scenario.imperfection;
    j["expected_sbr"] = finite_or_string(r.expected_sbr);
    if (r.mc_sbr)
        j["mc_sbr"] = *r.mc_sbr;
    if (r.mc_sbr_lower_bound)
        j["mc_sbr_lower_bound"] = *r.mc_sbr_lower_bound;
    if (r.analytic_visibility)
        j["analytic_visibility"] = *r.analytic_visibility;
    if (r.mc_visibility)
    {
        j["mc_visibility"] = *r.mc_visibility;
        j["mc_visibility_sigma"] = *r.mc_visibility_sigma;
    }
    if (r.analytic_fit)
        j["analytic_fit"] = fit_record(*r.analytic_fit);
    if (r.mc_fit)
        j["mc_fit"] = fit_record(*r.mc_fit);
    Json pts = Json::array();
    for (const auto& p : r.points)
    {
        Json jp;
        jp["control"] = p.control;
        jp["expected_sbr"] = finite_or_string(p.expected_sbr);
        if (p.analytic)
            jp["analytic"] = {{"p1", p.analytic->p1}, {"p2", p.analytic->p2}, {"p12", p.analytic->p12},
                              {"g", p.analytic->g}};
        if (p.counts)
            jp["counts"] = {{"c1", p.counts->c1}, {"c2", p.counts->c2}, {"c12", p.counts->c12},
                            {"n", p.counts->n_triggers}};
        pts.push_back(jp);
    }
    j["points"] = pts;
    j["config"] = serialize(r.scenario);
    return j.dump(2) + "\n";
}

std::string curve_csv(const RunReport& r, bool mc)
{
    std::ostringstream out;
    out.precision(17);
    out << "control_value,g,sigma\n";
    const auto n = static_cast<double>(r.scenario.n_triggers);
    for (const auto& p : r.points)
    {
        if (mc)
        {
            if (!p.counts)
                continue;
            if (p.counts->c1 == 0 || p.counts->c2 == 0)
                out << p.control << ",nan,nan\n";
            else
                out << p.control << ',' << normalized_rate(*p.counts) << ',' << normalized_rate_sigma(*p.counts)
                    << '\n';
        }
        else if (p.analytic)
        {
            const auto& a = *p.analytic;
            out << p.control << ',' << a.g << ','
                << normalized_rate_sigma(n * a.p1, n * a.p2, n * a.p12, n) << '\n';
        }
    }
    return out.str();
}

std::string counts_csv(const RunReport& r)
{
    std::ostringstream out;
    out.precision(17);
    out << (r.scenario.scan == ScanVariable::Delay ? "delay_ns" : "theta_deg") << ",c1,c2,c12,n\n";
    for (const auto& p : r.points)
        if (p.counts)
            out << p.control << ',' << p.counts->c1 << ',' << p.counts->c2 << ',' << p.counts->c12 << ','
                << p.counts->n_triggers << '\n';
    return out.str();
}

std::vector<std::filesystem::path> write_artifacts(const RunReport& r, const std::filesystem::path& dir,
                                                   ExportFormat format)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto put = [&](const std::string& file, const std::string& text) {
        const auto path = dir / file;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error("cannot write " + path.string());
        out << text;
        written.push_back(path);
    };
    const std::string& name = r.scenario.name;
    if (format == ExportFormat::Json)
        put(name + ".json", report_json(r));
    else
    {
        if (r.points.front().analytic)
            put(name + "_analytic.csv", curve_csv(r, false));
        if (r.points.front().counts)
        {
            put(name + "_mc.csv", curve_csv(r, true));
            put(name + "_counts.csv", counts_csv(r));
        }
    }
    for (std::size_t i = 0; i < r.streams.size(); ++i)
    {
        const auto path = dir / (name + "_p" + std::to_string(i) + ".htt");
        write_stream_file(path, r.streams[i]);
        written.push_back(path);
    }
    return written;
}

}  // namespace homsim
