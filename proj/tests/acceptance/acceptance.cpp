// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "homsim/analysis.hpp"
#include "homsim/fit.hpp"
#include "homsim/hom.hpp"
#include "homsim/montecarlo.hpp"
#include "homsim/run.hpp"
#include "homsim/scenario.hpp"
#include "homsim/table1.hpp"
#include "homsim/timetag.hpp"

using namespace homsim;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1. Coherent-state floor.
Outcome floor_criterion()
{
    const auto t0 = Clock::now();
    HomInput in;
    in.mu_a = in.mu_b = 1e-3;
    in.zeta = 1.0;
    const double g1 = analytic_hom(in).g;
    in.zeta = 0.0;
    const double g0 = analytic_hom(in).g;
    const double v = 1.0 - g1 / g0;
    const double dt = seconds_since(t0);
    return {std::abs(v - 0.5) <= 0.002 && dt < 1.0, fmt("V = %.5f (0.500 +- 0.002), %.4f s", v, dt)};
}

// 2. SBR law on simulated data.
Outcome sbr_law_criterion()
{
    constexpr double kTarget = 0.45;
    constexpr std::uint64_t kTriggers = 60'000'000;
    const auto t0 = Clock::now();
    Scenario ref = load_preset("sbr-reference");
    ref.imperfection = calibrate_imperfection(ref, kTarget);
    ref.calibrate_visibility.reset();
    ref.mode = RunMode::MonteCarlo;
    ref.n_triggers = kTriggers;

    const std::vector<double> sbrs{2.5, 5.0, 10.0, 37.0, 1e6};
    std::vector<SbrPoint> pts;
    for (std::size_t i = 0; i < sbrs.size(); ++i)
    {
        Scenario s = ref;
        for (auto& a : s.arms)
            a.noise.sbr = sbrs[i];
        s.master_seed = ref.master_seed + i;
        const auto r = run(s);
        pts.push_back({sbrs[i], *r.mc_visibility, *r.mc_visibility_sigma});
    }
    const auto f = fit_sbr_model(pts);
    double worst = 0.0;
    for (const auto& p : pts)
        worst = std::max(worst, std::abs(p.visibility - visibility_vs_sbr(f.visibility(), p.sbr)));
    const double dt = seconds_since(t0);
    const bool ok = std::abs(f.visibility() - kTarget) <= 0.01 && worst < 0.02 && dt < 60.0;
    return {ok, fmt("V_s = %.4f +- %.4f (target 0.45 +- 0.01), max pointwise deviation %.4f (< 0.02), "
                    "%.1f s at %.0e triggers/point",
                    f.visibility(), f.visibility_sigma(), worst, dt, static_cast<double>(kTriggers))};
}

// 3. Measured-visibility table.
Outcome table1_criterion()
{
    const auto rep = table1_suite();
    struct Expect
    {
        double sbr, law_pct;
    };
    const std::vector<Expect> expected{{37.0, 42.7}, {2.6, 23.5}, {2.4, 22.4}, {25.0, 41.6}};
    bool ok = rep.all_pass;
    std::ostringstream d;
    for (const auto& e : expected)
    {
        const Table1Row* row = nullptr;
        for (const auto& r : rep.rows)
            if (r.measured_sbr && *r.measured_sbr == e.sbr)
                row = &r;
        if (!row)
            return {false, fmt("no table row with SBR %g", e.sbr)};
        const double pct = 100.0 * *row->law_v;
        const bool match = std::abs(pct - e.law_pct) <= 0.05 + 1e-9;
        const bool within = std::abs(*row->law_v - row->measured_v) <= 3.0 * row->measured_sigma;
        const bool node = std::abs(*row->reference_v - *row->law_v) <= 0.005;
        ok = ok && match && within && node;
        d << fmt("SBR %g: %.1f%% vs %.1f+-%.1f; ", e.sbr, pct, 100 * row->measured_v, 100 * row->measured_sigma);
    }
    for (const auto& r : rep.rows)
        if (!r.included)
            d << fmt("excluded %s %.1f us row: measured %.1f%%, SBR law %.1f%%", r.config.c_str(), r.roi_us,
                     100 * r.measured_v, 100 * *r.law_v);
    return {ok, d.str()};
}

// 4. cos^2 law through the full pipeline, and theta0 on synthetic data.
Outcome cos2_criterion()
{
    bool ok = true;
    std::ostringstream d;
    const std::vector<double> overlaps{1.0, 0.8, 0.6, 0.4, 0.2};
    for (std::size_t i = 0; i < overlaps.size(); ++i)
    {
        Scenario s = load_preset("fig2-pol");
        s.calibrate_visibility.reset();
        s.imperfection = overlaps[i];
        for (auto& a : s.arms)
        {
            a.source.dop = 1.0;
            a.source.eom_extinction_db = kInf;
            a.noise.sbr = kInf;
        }
        s.mode = RunMode::Both;
        s.n_triggers = 200'000;
        s.master_seed = 400 + i;
        const auto r = run(s);
        const double pull = (*r.mc_visibility - *r.analytic_visibility) / *r.mc_visibility_sigma;
        ok = ok && std::abs(pull) <= 2.0;
        d << fmt("|z|=%.1f: %.3f vs %.3f (%.1f sigma); ", overlaps[i], *r.mc_visibility, *r.analytic_visibility, pull);
    }

    std::mt19937_64 rng(44);
    double worst = 0.0;
    for (double t0 : {-63.0, -12.5, 0.0, 21.7, 80.0})
    {
        std::vector<double> xs;
        for (double th = -90.0; th <= 90.0; th += 15.0)
            xs.push_back(th);
        const auto model = [t0](double th) {
            const double c = std::cos((th - t0) * std::numbers::pi / 180.0);
            return 1.0 - 0.42 * c * c;
        };
        std::vector<RatePoint> pts;
        for (const auto& p : oracle::poisson_curve(xs, model, 2e5, 2e5, 4e6, rng))
            pts.push_back({p.x, p.c1, p.c2, p.c12, p.n});
        const double got = std::get<CosineSquared>(fit_cos2(pts).model).theta0_deg;
        worst = std::max(worst, std::abs(got - t0));
    }
    ok = ok && worst < 1.0;
    d << fmt("theta0 worst error %.3f deg", worst);
    return {ok, d.str()};
}

// 5. Matched retrieved pulses beat mismatched leakage.
Outcome leakage_criterion()
{
    Scenario ret = load_preset("fig4-pol");
    Scenario leak = load_preset("fig4-leakage");
    ret.mode = leak.mode = RunMode::Analytic;
    const double vr = *run(ret).analytic_visibility;
    const double vl = *run(leak).analytic_visibility;
    return {vr - vl > 0.05, fmt("V_retrieved %.3f, V_leakage %.3f, difference %.3f (> 0.05)", vr, vl, vr - vl)};
}

// 6. Monte Carlo against the analytic oracle for every preset.
Outcome oracle_criterion()
{
    constexpr std::uint64_t kTriggers = 200'000;
    bool ok = true;
    std::ostringstream d;
    for (const auto& name : preset_names())
    {
        Scenario s = load_preset(name);
        if (s.calibrate_visibility)
            s.imperfection = calibrate_imperfection(s, *s.calibrate_visibility);
        double control = 0.0;
        if (!s.grid.empty())
            control = *std::min_element(s.grid.begin(), s.grid.end(),
                                        [](double a, double b) { return std::abs(a) < std::abs(b); });
        const auto p = build_point(s, control);
        const auto a = analytic_hom(evaluate_roi(p.node, p.roi), p.node.phase);
        const auto cs = count_in_roi(simulate_stream(p.node, s.master_seed, 0, kTriggers), p.roi);
        const double n = static_cast<double>(kTriggers);
        double worst = 0.0;
        for (auto [k, q] : {std::pair{cs.c1, a.p1}, std::pair{cs.c2, a.p2}, std::pair{cs.c12, a.p12}})
        {
            const double sigma = std::sqrt(q * (1.0 - q) / n);
            worst = std::max(worst, std::abs(static_cast<double>(k) / n - q) / sigma);
        }
        ok = ok && worst <= 3.0;
        d << fmt("%s %.2f; ", name.c_str(), worst);
    }
    return {ok, "worst |pull| per preset: " + d.str()};
}

// 7. Time-tag I/O.
Outcome io_criterion()
{
    const auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    TimeTagStream g;
    g.header.master_seed = 42;
    g.header.n_triggers = 3;
    g.tags = {{1000, 0}, {25'000'123, 1}, {50'000'000, 0}};
    std::ostringstream bin(std::ios::binary), csv;
    write_stream(bin, g);
    write_stream_csv(csv, g);
    const auto dir = std::filesystem::path(HOMSIM_TEST_DATA);
    bool ok = bin.str() == slurp(dir / "golden3.htt") && csv.str() == slurp(dir / "golden3.csv") &&
              read_stream_file(dir / "golden3.htt") == g && read_stream_file(dir / "golden3.csv") == g;
    const bool golden_ok = ok;

    std::mt19937_64 rng(2718);
    int good = 0;
    for (int i = 0; i < 100; ++i)
    {
        TimeTagStream s;
        s.header.resolution_ps = 1 + rng() % 500;
        s.header.trigger_period_ps = 1 + rng() % 50'000'000;
        s.header.n_triggers = rng() % 100'000;
        if (i % 2)
            s.header.master_seed = rng();
        s.tags.resize(rng() % 500);
        for (auto& t : s.tags)
            t = {rng() >> 4, static_cast<std::uint8_t>(rng() % 2)};
        std::sort(s.tags.begin(), s.tags.end());
        std::ostringstream b(std::ios::binary), c;
        write_stream(b, s);
        write_stream_csv(c, s);
        std::istringstream bi(b.str(), std::ios::binary), ci(c.str());
        const auto rb = read_stream(bi);
        const auto rc = read_stream_csv(ci);
        std::ostringstream b2(std::ios::binary), c2;
        write_stream(b2, rb);
        write_stream_csv(c2, rc);
        good += rb == s && rc == s && b2.str() == b.str() && c2.str() == c.str();
    }
    ok = ok && good == 100;
    return {ok, fmt("golden fixture %s, %d/100 random streams byte-exact", golden_ok ? "byte-exact" : "MISMATCH", good)};
}

// 8. Fitter calibration.
struct Calibration
{
    double bias_in_se;
    double sigma_ratio;
    bool ok() const { return bias_in_se < 3.0 && std::abs(sigma_ratio - 1.0) <= 0.3; }
};

Calibration calibrate(const std::function<std::pair<double, double>(std::mt19937_64&)>& replicate, double truth,
                      std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> values, sigmas;
    for (int i = 0; i < 100; ++i)
    {
        const auto [v, s] = replicate(rng);
        values.push_back(v);
        sigmas.push_back(s);
    }
    const double sd = oracle::stddev(values);
    return {std::abs(oracle::mean(values) - truth) / (sd / 10.0), oracle::mean(sigmas) / sd};
}

Outcome fitter_criterion()
{
    std::vector<double> angles, delays;
    for (double th = -90.0; th <= 90.0; th += 15.0)
        angles.push_back(th);
    for (double t = -600.0; t <= 600.0; t += 50.0)
        delays.push_back(t);
    const auto to_points = [](const std::vector<oracle::SyntheticPoint>& s) {
        std::vector<RatePoint> out;
        for (const auto& p : s)
            out.push_back({p.x, p.c1, p.c2, p.c12, p.n});
        return out;
    };

    const auto c2 = calibrate(
        [&](std::mt19937_64& rng) {
            const CosineSquared truth{1.0, 0.42, 0.0};
            const auto f = fit_cos2(to_points(oracle::poisson_curve(angles, truth, 1e5, 1e5, 4e6, rng)));
            return std::pair{f.visibility(), f.visibility_sigma()};
        },
        0.42, 81);
    const auto dip = calibrate(
        [&](std::mt19937_64& rng) {
            const GaussianDip truth{1.0, 0.25, 0.0, 150.0};
            const auto f = fit_gaussian_dip(to_points(oracle::poisson_curve(delays, truth, 1e5, 1e5, 4e6, rng)));
            return std::pair{f.visibility(), f.visibility_sigma()};
        },
        0.25, 82);
    const auto sbr = calibrate(
        [&](std::mt19937_64& rng) {
            std::normal_distribution<double> noise(0.0, 1.0);
            std::vector<SbrPoint> pts;
            for (double s : {2.5, 5.0, 10.0, 37.0, 1e6})
            {
                const double sigma = 0.02;
                pts.push_back({s, visibility_vs_sbr(0.45, s) + sigma * noise(rng), sigma});
            }
            const auto f = fit_sbr_model(pts);
            return std::pair{f.visibility(), f.visibility_sigma()};
        },
        0.45, 83);
    const bool ok = c2.ok() && dip.ok() && sbr.ok();
    return {ok, fmt("bias/SE and sigma ratio: cos2 %.2f, %.2f; dip %.2f, %.2f; sbr %.2f, %.2f", c2.bias_in_se,
                    c2.sigma_ratio, dip.bias_in_se, dip.sigma_ratio, sbr.bias_in_se, sbr.sigma_ratio)};
}

// 9. MDI-QKD threshold.
Outcome threshold_criterion()
{
    const bool a = mdiqkd_threshold_check(0.419);
    const bool b = mdiqkd_threshold_check(0.259);
    return {a && !b, fmt("0.419 -> %s, 0.259 -> %s", a ? "true" : "false", b ? "true" : "false")};
}

}  // namespace

int main()
{
    const auto t0 = Clock::now();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"coherent-state floor", floor_criterion},
        {"SBR law on simulated data", sbr_law_criterion},
        {"measured-visibility table", table1_criterion},
        {"cos^2 law", cos2_criterion},
        {"leakage contrast", leakage_criterion},
        {"Monte Carlo vs analytic oracle", oracle_criterion},
        {"time-tag I/O", io_criterion},
        {"fitter calibration", fitter_criterion},
        {"MDI-QKD threshold", threshold_criterion},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %zu %s: %s  [%s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance wall clock %.1f s\n", seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
