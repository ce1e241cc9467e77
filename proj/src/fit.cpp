#include "homsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "homsim/error.hpp"

namespace homsim
{

RatePoint RatePoint::from_counts(double x, const CountSummary& cs)
{
    return RatePoint{x, static_cast<double>(cs.c1), static_cast<double>(cs.c2), static_cast<double>(cs.c12),
                     static_cast<double>(cs.n_triggers)};
}

double CosineSquared::operator()(double theta_deg) const
{
    const double c = std::cos((theta_deg - theta0_deg) * std::numbers::pi / 180.0);
    return amplitude * (1.0 - visibility * c * c);
}

double GaussianDip::operator()(double delay_ns) const
{
    const double z = (delay_ns - center_ns) / sigma_ns;
    return baseline * (1.0 - visibility * std::exp(-0.5 * z * z));
}

double SbrModel::operator()(double sbr) const
{
    const double f = 1.0 + 1.0 / sbr;
    return source_visibility / (f * f);
}

double fitted_visibility(const FitModel& m)
{
    return std::visit(
        [](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, SbrModel>)
                return v.source_visibility;
            else
                return v.visibility;
        },
        m);
}

std::string model_name(const FitModel& m)
{
    switch (m.index())
    {
    case 0: return "cos2";
    case 1: return "gaussian_dip";
    default: return "sbr";
    }
}

std::vector<std::pair<std::string, double>> model_parameters(const FitModel& m)
{
    if (const auto* c = std::get_if<CosineSquared>(&m))
        return {{"A", c->amplitude}, {"V", c->visibility}, {"theta0_deg", c->theta0_deg}};
    if (const auto* g = std::get_if<GaussianDip>(&m))
        return {{"baseline", g->baseline}, {"V", g->visibility}, {"center_ns", g->center_ns}, {"sigma_ns", g->sigma_ns}};
    return {{"V_s", std::get<SbrModel>(m).source_visibility}};
}

namespace
{

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Model value and parameter gradient at control value x.
using ModelFn = std::function<double(double x, const Vec& p, Vec* grad)>;

struct Problem
{
    std::span<const RatePoint> points;
    ModelFn model;
    Vec lower;
    Vec upper;
    std::vector<double> scale;  // typical parameter magnitudes for numeric derivatives

    static double weight(const RatePoint& pt) { return pt.c1 * pt.c2 / pt.n; }

    /// Negative log-likelihood relative to the saturated model.
    double nll(const Vec& p) const
    {
        double s = 0.0;
        for (const auto& pt : points)
        {
            const double mu = weight(pt) * model(pt.x, p, nullptr);
            if (!(mu > 0.0))
            {
                if (pt.c12 > 0.0 || mu < 0.0)
                    return std::numeric_limits<double>::infinity();
                continue;
            }
            s += mu - pt.c12;
            if (pt.c12 > 0.0)
                s -= pt.c12 * std::log(mu / pt.c12);
        }
        return s;
    }

    double loglik(const Vec& p) const
    {
        double s = 0.0;
        for (const auto& pt : points)
        {
            const double mu = weight(pt) * model(pt.x, p, nullptr);
            s += -mu - std::lgamma(pt.c12 + 1.0);
            if (pt.c12 > 0.0)
                s += pt.c12 * std::log(mu);
        }
        return s;
    }

    void gradient_fisher(const Vec& p, Vec& grad, Mat& fisher) const
    {
        const auto k = p.size();
        grad = Vec::Zero(k);
        fisher = Mat::Zero(k, k);
        Vec dm(k);
        for (const auto& pt : points)
        {
            const double w = weight(pt);
            const double m = model(pt.x, p, &dm);
            if (!(m > 0.0))
                continue;
            grad += w * (1.0 - pt.c12 / (w * m)) * dm;
            fisher += (w / m) * dm * dm.transpose();
        }
    }

    Vec gradient(const Vec& p) const
    {
        Vec g;
        Mat f;
        gradient_fisher(p, g, f);
        return g;
    }

    Vec project(Vec p) const { return p.cwiseMax(lower).cwiseMin(upper); }
};

struct Solution
{
    Vec params;
    double nll = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Box-projected Levenberg-Marquardt on the Fisher information.
Solution minimize(const Problem& prob, Vec p, const FitOptions& opt)
{
    p = prob.project(p);
    double f = prob.nll(p);
    if (!std::isfinite(f))
        return {};
    double lambda = 1e-3;
    Vec g;
    Mat fisher;
    for (int it = 1; it <= opt.max_iterations; ++it)
    {
        prob.gradient_fisher(p, g, fisher);
        // Parameters pinned at a bound with the gradient pushing outward stay fixed.
        std::vector<int> free;
        for (int i = 0; i < p.size(); ++i)
        {
            const bool at_lo = p[i] <= prob.lower[i] && g[i] > 0.0;
            const bool at_hi = p[i] >= prob.upper[i] && g[i] < 0.0;
            if (!at_lo && !at_hi)
                free.push_back(i);
        }
        if (free.empty())
            return {p, f, it};

        const auto nf = static_cast<Eigen::Index>(free.size());
        Mat a(nf, nf);
        Vec b(nf);
        for (Eigen::Index r = 0; r < nf; ++r)
        {
            b[r] = -g[free[r]];
            for (Eigen::Index c = 0; c < nf; ++c)
                a(r, c) = fisher(free[r], free[c]);
        }

        bool improved = false;
        while (lambda < 1e12)
        {
            Mat damped = a;
            for (Eigen::Index r = 0; r < nf; ++r)
                damped(r, r) += lambda * std::max(a(r, r), 1e-12);
            const Vec step = damped.ldlt().solve(b);
            Vec trial = p;
            for (Eigen::Index r = 0; r < nf; ++r)
                trial[free[r]] += step[r];
            trial = prob.project(trial);
            const double ft = prob.nll(trial);
            if (ft < f)
            {
                const double drop = f - ft;
                p = trial;
                f = ft;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                if (drop < opt.tolerance)
                    return {p, f, it};
                break;
            }
            lambda *= 10.0;
        }
        if (!improved)
            return {p, f, it};  // no descent direction left at working precision
    }
    std::ostringstream msg;
    msg << "fit did not converge after " << opt.max_iterations << " iterations; nll=" << f << " params=["
        << p.transpose() << "] lambda=" << lambda;
    throw FitError(msg.str());
}

/// Covariance from the observed information (central differences of the
/// analytic gradient).
Vec curvature_sigmas(const Problem& prob, const Vec& p)
{
    const auto k = p.size();
    Mat h(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
    {
        const double step = 1e-5 * std::max(std::abs(p[i]), prob.scale[static_cast<std::size_t>(i)]);
        Vec up = p;
        Vec dn = p;
        up[i] += step;
        dn[i] -= step;
        h.col(i) = (prob.gradient(up) - prob.gradient(dn)) / (2.0 * step);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Mat cov;
    Eigen::LLT<Mat> llt(h);
    if (llt.info() == Eigen::Success)
        cov = llt.solve(Mat::Identity(k, k));
    else
        cov = Eigen::CompleteOrthogonalDecomposition<Mat>(h).pseudoInverse();
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

Solution multistart(const Problem& prob, const std::vector<Vec>& starts, const FitOptions& opt)
{
    Solution best;
    std::string last_error;
    for (const auto& s : starts)
    {
        try
        {
            auto sol = minimize(prob, s, opt);
            if (sol.nll < best.nll)
                best = sol;
        }
        catch (const FitError& e)
        {
            last_error = e.what();
        }
    }
    if (!std::isfinite(best.nll))
        throw FitError(last_error.empty() ? "no start point gave a finite likelihood" : last_error);
    return best;
}

void check_points(std::span<const RatePoint> points)
{
    for (const auto& pt : points)
        if (!(pt.c1 > 0.0 && pt.c2 > 0.0 && pt.n > 0.0 && pt.c12 >= 0.0))
            throw PreconditionError("every fit point needs positive singles and trigger count");
}

/// ML normalized rate of a flat model; used to seed amplitudes.
double flat_rate(std::span<const RatePoint> points)
{
    double c = 0.0;
    double w = 0.0;
    for (const auto& pt : points)
    {
        c += pt.c12;
        w += pt.c1 * pt.c2 / pt.n;
    }
    if (!(c > 0.0))
        throw FitError("no coincidences in any scan point");
    return c / w;
}

double wrap_angle_deg(double a)
{
    a = std::fmod(a, 180.0);
    if (a <= -90.0)
        a += 180.0;
    else if (a > 90.0)
        a -= 180.0;
    return a;
}

using Refit = std::function<FitModel(std::span<const RatePoint>)>;

/// Parametric bootstrap: c12 redrawn from the fitted expectation.
std::optional<FitModel> bootstrap_spread(std::span<const RatePoint> points, const FitModel& fitted,
                                         const FitOptions& opt, const Refit& refit)
{
    if (opt.bootstrap_resamples <= 0)
        return std::nullopt;
    std::mt19937_64 rng(opt.seed);
    std::vector<RatePoint> sample(points.begin(), points.end());
    const auto names = model_parameters(fitted);
    std::vector<std::vector<double>> draws(names.size());
    for (int r = 0; r < opt.bootstrap_resamples; ++r)
    {
        for (std::size_t i = 0; i < sample.size(); ++i)
        {
            const double mu = std::visit([&](const auto& m) { return m(points[i].x); }, fitted) *
                              points[i].c1 * points[i].c2 / points[i].n;
            sample[i].c12 = static_cast<double>(std::poisson_distribution<std::int64_t>(std::max(mu, 0.0))(rng));
        }
        try
        {
            const auto params = model_parameters(refit(sample));
            for (std::size_t j = 0; j < params.size(); ++j)
                draws[j].push_back(params[j].second);
        }
        catch (const FitError&)
        {
        }
    }
    std::vector<double> sd;
    for (const auto& d : draws)
    {
        if (d.size() < 2)
            throw FitError("bootstrap produced too few successful refits");
        double mean = 0.0;
        for (double v : d)
            mean += v;
        mean /= static_cast<double>(d.size());
        double var = 0.0;
        for (double v : d)
            var += (v - mean) * (v - mean);
        sd.push_back(std::sqrt(var / static_cast<double>(d.size() - 1)));
    }
    if (std::holds_alternative<CosineSquared>(fitted))
        return CosineSquared{sd[0], sd[1], sd[2]};
    return GaussianDip{sd[0], sd[1], sd[2], sd[3]};
}

FitResult cos2_core(std::span<const RatePoint> points, const FitOptions& opt)
{
    constexpr double deg = std::numbers::pi / 180.0;
    Problem prob;
    prob.points = points;
    prob.model = [](double x, const Vec& p, Vec* grad) {
        const double c = std::cos((x - p[2]) * deg);
        const double s = std::sin((x - p[2]) * deg);
        if (grad)
        {
            grad->resize(3);
            (*grad)[0] = 1.0 - p[1] * c * c;
            (*grad)[1] = -p[0] * c * c;
            (*grad)[2] = -p[0] * p[1] * 2.0 * c * s * deg;
        }
        return p[0] * (1.0 - p[1] * c * c);
    };
    const double inf = std::numeric_limits<double>::infinity();
    prob.lower = Vec::Zero(3);
    prob.upper = Vec::Zero(3);
    prob.lower << 1e-12, 0.0, -inf;
    prob.upper << inf, 1.0, inf;
    prob.scale = {1.0, 0.1, 1.0};

    const double a0 = flat_rate(points) / 0.75;
    const auto lowest = std::min_element(points.begin(), points.end(),
                                         [](const auto& l, const auto& r) { return l.rate() < r.rate(); });
    std::vector<double> centers{-60.0, -30.0, 0.0, 30.0, 60.0, wrap_angle_deg(lowest->x)};
    std::vector<Vec> starts;
    for (double c : centers)
    {
        Vec s(3);
        s << a0, 0.5, c;
        starts.push_back(s);
    }
    Solution best = multistart(prob, starts, opt);
    best.params[2] = wrap_angle_deg(best.params[2]);
    const Vec sig = curvature_sigmas(prob, best.params);

    FitResult r;
    r.model = CosineSquared{best.params[0], best.params[1], best.params[2]};
    r.sigma = CosineSquared{sig[0], sig[1], sig[2]};
    r.loglik = prob.loglik(best.params);
    r.n_points = points.size();
    r.iterations = best.iterations;
    return r;
}

FitResult dip_core(std::span<const RatePoint> points, const FitOptions& opt)
{
    Problem prob;
    prob.points = points;
    prob.model = [](double x, const Vec& p, Vec* grad) {
        const double z = (x - p[2]) / p[3];
        const double e = std::exp(-0.5 * z * z);
        if (grad)
        {
            grad->resize(4);
            (*grad)[0] = 1.0 - p[1] * e;
            (*grad)[1] = -p[0] * e;
            (*grad)[2] = -p[0] * p[1] * e * z / p[3];
            (*grad)[3] = -p[0] * p[1] * e * z * z / p[3];
        }
        return p[0] * (1.0 - p[1] * e);
    };

    const auto [xmin_it, xmax_it] =
        std::minmax_element(points.begin(), points.end(), [](const auto& l, const auto& r) { return l.x < r.x; });
    const double span = xmax_it->x - xmin_it->x;
    if (!(span > 0.0))
        throw PreconditionError("delay points must span a non-zero range");
    double min_gap = span;
    std::vector<double> xs;
    for (const auto& pt : points)
        xs.push_back(pt.x);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] > xs[i - 1])
            min_gap = std::min(min_gap, xs[i] - xs[i - 1]);

    const double inf = std::numeric_limits<double>::infinity();
    prob.lower = Vec::Zero(4);
    prob.upper = Vec::Zero(4);
    prob.lower << 1e-12, 0.0, xmin_it->x, 0.05 * min_gap;
    prob.upper << inf, 1.0, xmax_it->x, 2.0 * span;
    prob.scale = {1.0, 0.1, span * 1e-2, span * 1e-2};

    // Baseline from the two outermost points on each side.
    std::vector<RatePoint> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& l, const auto& r) { return l.x < r.x; });
    const double flat = flat_rate(points);
    double b0 = 0.5 * (sorted.front().rate() + sorted.back().rate());
    if (!(b0 > 0.5 * flat))
        b0 = flat;
    const auto lowest = std::min_element(sorted.begin(), sorted.end(),
                                         [](const auto& l, const auto& r) { return l.rate() < r.rate(); });
    const double v0 = std::clamp(1.0 - lowest->rate() / b0, 0.05, 0.95);

    std::vector<Vec> starts;
    for (double c : {lowest->x, 0.5 * (xmin_it->x + xmax_it->x)})
        for (double w : {span / 10.0, span / 4.0, std::max(min_gap, span / 30.0)})
        {
            Vec s(4);
            s << b0, v0, c, w;
            starts.push_back(s);
        }
    const Solution best = multistart(prob, starts, opt);
    const Vec sig = curvature_sigmas(prob, best.params);

    FitResult r;
    r.model = GaussianDip{best.params[0], best.params[1], best.params[2], best.params[3]};
    r.sigma = GaussianDip{sig[0], sig[1], sig[2], sig[3]};
    r.loglik = prob.loglik(best.params);
    r.n_points = points.size();
    r.iterations = best.iterations;
    return r;
}

}  // namespace

FitResult fit_cos2(std::span<const RatePoint> points, const FitOptions& options)
{
    if (points.size() < 4)
        throw PreconditionError("cos^2 fit needs at least 4 points");
    check_points(points);
    const auto [lo, hi] =
        std::minmax_element(points.begin(), points.end(), [](const auto& l, const auto& r) { return l.x < r.x; });
    if (hi->x - lo->x < 90.0 - 1e-9)
        throw PreconditionError("cos^2 fit needs angles spanning at least 90 degrees");
    FitResult r = cos2_core(points, options);
    FitOptions inner = options;
    inner.bootstrap_resamples = 0;
    r.bootstrap = bootstrap_spread(points, r.model, options,
                                   [&](std::span<const RatePoint> s) { return cos2_core(s, inner).model; });
    return r;
}

FitResult fit_gaussian_dip(std::span<const RatePoint> points, const FitOptions& options)
{
    if (points.size() < 5)
        throw PreconditionError("Gaussian dip fit needs at least 5 points");
    check_points(points);
    FitResult r = dip_core(points, options);
    FitOptions inner = options;
    inner.bootstrap_resamples = 0;
    r.bootstrap = bootstrap_spread(points, r.model, options,
                                   [&](std::span<const RatePoint> s) { return dip_core(s, inner).model; });
    return r;
}

FitResult fit_sbr_model(std::span<const SbrPoint> points)
{
    if (points.empty())
        throw PreconditionError("SBR fit needs at least one point");
    double num = 0.0;
    double den = 0.0;
    for (const auto& pt : points)
    {
        if (!(pt.sbr > 0.0) || !(pt.sigma > 0.0) || !std::isfinite(pt.visibility))
            throw FitError("SBR fit points need positive SBR and sigma");
        const double f = 1.0 + 1.0 / pt.sbr;
        const double h = 1.0 / (f * f);
        num += h * pt.visibility / (pt.sigma * pt.sigma);
        den += h * h / (pt.sigma * pt.sigma);
    }
    const double vs = num / den;
    double ll = 0.0;
    for (const auto& pt : points)
    {
        const double r = (pt.visibility - SbrModel{vs}(pt.sbr)) / pt.sigma;
        ll += -0.5 * r * r - std::log(pt.sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    FitResult out;
    out.model = SbrModel{vs};
    out.sigma = SbrModel{1.0 / std::sqrt(den)};
    out.loglik = ll;
    out.n_points = points.size();
    return out;
}

}  // namespace homsim
