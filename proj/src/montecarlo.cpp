#include "homsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "homsim/error.hpp"

namespace homsim
{

namespace
{

using Engine = std::mt19937_64;

double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Poisson sampler for a fixed mean; multiplication method for small means.
class PoissonSampler
{
public:
    explicit PoissonSampler(double mean) : mean_(mean), limit_(std::exp(-mean))
    {
        if (mean_ >= kLargeMean)
            large_ = std::poisson_distribution<std::uint64_t>(mean_);
    }

    std::uint64_t operator()(Engine& rng)
    {
        if (mean_ <= 0.0)
            return 0;
        if (mean_ >= kLargeMean)
            return large_(rng);
        std::uint64_t k = 0;
        double p = uniform01(rng);
        while (p > limit_)
        {
            ++k;
            p *= uniform01(rng);
        }
        return k;
    }

private:
    static constexpr double kLargeMean = 30.0;
    double mean_;
    double limit_;
    std::poisson_distribution<std::uint64_t> large_;
};

struct PulseSampler
{
    double mean = 0.0;  // photons at the beamsplitter
    TemporalEnvelope envelope;
    double cut_quantile = 1.0;  // retained Gaussian mass for TruncatedFront

    double intensity(double t) const { return mean * envelope.intensity(t); }

    double draw(Engine& rng, std::normal_distribution<double>& gauss) const
    {
        const double sigma = envelope.sigma_ns();
        if (envelope.shape == EnvelopeShape::Gaussian)
            return envelope.center_ns + sigma * gauss(rng);
        if (cut_quantile > 0.2)
        {
            for (;;)
            {
                const double t = envelope.center_ns + sigma * gauss(rng);
                if (t <= envelope.cut_ns)
                    return t;
            }
        }
        // Inverse CDF by bisection for deep truncation.
        const double target = uniform01(rng) * cut_quantile;
        double lo = -9.0;
        double hi = (envelope.cut_ns - envelope.center_ns) / sigma;
        for (int i = 0; i < 64; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            (normal_cdf(mid) < target ? lo : hi) = mid;
        }
        return envelope.center_ns + sigma * 0.5 * (lo + hi);
    }
};

/// Per-trigger sampling plan derived once from the node.
struct Plan
{
    std::vector<PulseSampler> a;
    std::vector<PulseSampler> b;
    std::vector<std::complex<double>> cross;  // a.size() x b.size(), row-major
    std::vector<double> cumulative;           // over a then b, by mean
    double total_mean = 0.0;
    double bound_scale = 0.0;                 // (1 + K) / 2

    std::array<double, 2> proposal_mean{};
    std::array<double, 2> noise_mean{};
    std::array<double, 2> dark_fraction{};
    std::array<double, 2> bg_weight_a{};      // share of arm A among background photons
    RoiWindow window_a;
    RoiWindow window_b;

    double period_ns = 0.0;
    std::uint64_t period_ps = 0;
    std::array<std::uint64_t, 2> resolution_ps{};
    std::array<double, 2> jitter_ns{};
    std::array<std::uint64_t, 2> dead_ps{};
    PhaseModel phase;
};

Plan make_plan(const NodeModel& node)
{
    node.validate();
    Plan plan;
    const auto collect = [](const ArmField& arm, std::vector<PulseSampler>& out) {
        for (const auto& p : arm.pulses)
        {
            PulseSampler s{p.mean_photons, p.mode.envelope, 1.0};
            if (s.envelope.shape == EnvelopeShape::TruncatedFront)
                s.cut_quantile = normal_cdf((s.envelope.cut_ns - s.envelope.center_ns) / s.envelope.sigma_ns());
            out.push_back(s);
        }
    };
    collect(node.arm_a, plan.a);
    collect(node.arm_b, plan.b);

    plan.cross.resize(plan.a.size() * plan.b.size());
    for (std::size_t j = 0; j < plan.a.size(); ++j)
        for (std::size_t k = 0; k < plan.b.size(); ++k)
            plan.cross[j * plan.b.size() + k] = node.cross_factor(j, k);

    std::size_t active_a = 0;
    std::size_t active_b = 0;
    for (const auto& s : plan.a)
    {
        plan.total_mean += s.mean;
        plan.cumulative.push_back(plan.total_mean);
        active_a += s.mean > 0.0;
    }
    for (const auto& s : plan.b)
    {
        plan.total_mean += s.mean;
        plan.cumulative.push_back(plan.total_mean);
        active_b += s.mean > 0.0;
    }
    plan.bound_scale = 0.5 * (1.0 + static_cast<double>(std::max(active_a, active_b)));

    const double bg_a = node.arm_a.background_density_per_ns * node.arm_a.background_window.width_ns();
    const double bg_b = node.arm_b.background_density_per_ns * node.arm_b.background_window.width_ns();
    plan.window_a = node.arm_a.background_window;
    plan.window_b = node.arm_b.background_window;

    plan.period_ns = node.trigger_period_ns;
    plan.period_ps = static_cast<std::uint64_t>(std::llround(node.trigger_period_ns * 1e3));
    plan.phase = node.phase;
    for (std::size_t d = 0; d < 2; ++d)
    {
        const auto& det = node.detectors[d];
        plan.proposal_mean[d] = det.efficiency * plan.bound_scale * plan.total_mean;
        const double bg = det.efficiency * 0.5 * (bg_a + bg_b);
        const double dark = det.dark_rate_hz * node.trigger_period_ns * 1e-9;
        plan.noise_mean[d] = bg + dark;
        plan.dark_fraction[d] = plan.noise_mean[d] > 0.0 ? dark / plan.noise_mean[d] : 0.0;
        plan.bg_weight_a[d] = (bg_a + bg_b) > 0.0 ? bg_a / (bg_a + bg_b) : 0.0;
        plan.resolution_ps[d] = static_cast<std::uint64_t>(std::llround(det.resolution_ps));
        plan.jitter_ns[d] = det.jitter_sigma_ns;
        plan.dead_ps[d] = static_cast<std::uint64_t>(std::llround(det.dead_time_ns * 1e3));
    }
    return plan;
}

Engine make_engine(const TrialKey& key)
{
    const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xFFFFFFFFu); };
    const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(key.master_seed), hi(key.master_seed), lo(key.point_index),
                      hi(key.point_index), lo(key.trial_index), hi(key.trial_index)};
    return Engine(seq);
}

void apply_dead_time(std::vector<TimeTag>& tags, const std::array<std::uint64_t, 2>& dead_ps)
{
    if (dead_ps[0] == 0 && dead_ps[1] == 0)
        return;
    std::array<std::optional<std::uint64_t>, 2> last;
    std::erase_if(tags, [&](const TimeTag& t) {
        if (t.channel > 1 || dead_ps[t.channel] == 0)
            return false;
        auto& prev = last[t.channel];
        if (prev && t.time_ps - *prev < dead_ps[t.channel])
            return true;
        prev = t.time_ps;
        return false;
    });
}

}  // namespace

std::vector<TimeTag> mc_trial(const NodeModel& node, const TrialKey& key, std::uint64_t first_trigger,
                              std::uint64_t n_triggers)
{
    const Plan plan = make_plan(node);
    Engine rng = make_engine(key);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::array<PoissonSampler, 2> proposals{PoissonSampler(plan.proposal_mean[0]),
                                            PoissonSampler(plan.proposal_mean[1])};
    std::array<PoissonSampler, 2> noise{PoissonSampler(plan.noise_mean[0]), PoissonSampler(plan.noise_mean[1])};

    std::vector<TimeTag> tags;
    std::vector<double> ia(plan.a.size());
    std::vector<double> ib(plan.b.size());
    const double sine_rate_hz = plan.phase.rate_khz * 1e3;

    const auto emit = [&](std::uint64_t trigger, std::size_t d, double t_ns) {
        const double measured = t_ns + (plan.jitter_ns[d] > 0.0 ? plan.jitter_ns[d] * gauss(rng) : 0.0);
        const auto res = static_cast<double>(plan.resolution_ps[d]);
        const auto offset = static_cast<std::int64_t>(std::floor(measured * 1e3 / res) * res);
        const auto base = static_cast<std::int64_t>(trigger * plan.period_ps);
        if (base + offset < 0)
            return;
        tags.push_back(TimeTag{static_cast<std::uint64_t>(base + offset), static_cast<std::uint8_t>(d)});
    };

    for (std::uint64_t i = 0; i < n_triggers; ++i)
    {
        const std::uint64_t trigger = first_trigger + i;
        double u;
        if (plan.phase.kind == PhaseModelKind::UniformRandom)
            u = uniform01(rng);
        else
        {
            const double cycles = static_cast<double>(trigger) * plan.period_ns * 1e-9 * sine_rate_hz;
            u = cycles - std::floor(cycles);
        }
        std::optional<std::complex<double>> rot;  // only needed when a photon is proposed

        for (std::size_t d = 0; d < 2; ++d)
        {
            const double sign = d == 0 ? 1.0 : -1.0;
            for (auto n = proposals[d](rng); n > 0; --n)
            {
                const double pick = uniform01(rng) * plan.total_mean;
                const auto idx = static_cast<std::size_t>(
                    std::upper_bound(plan.cumulative.begin(), plan.cumulative.end(), pick) - plan.cumulative.begin());
                const auto& src = idx < plan.a.size() ? plan.a[idx] : plan.b[std::min(idx - plan.a.size(), plan.b.size() - 1)];
                const double t = src.draw(rng, gauss);

                double sum_a = 0.0;
                double sum_b = 0.0;
                for (std::size_t j = 0; j < plan.a.size(); ++j)
                    sum_a += ia[j] = plan.a[j].intensity(t);
                for (std::size_t k = 0; k < plan.b.size(); ++k)
                    sum_b += ib[k] = plan.b[k].intensity(t);
                std::complex<double> beat = 0.0;
                for (std::size_t j = 0; j < plan.a.size(); ++j)
                    for (std::size_t k = 0; k < plan.b.size(); ++k)
                        beat += plan.cross[j * plan.b.size() + k] * std::sqrt(ia[j] * ib[k]);
                if (!rot)
                    rot = std::polar(1.0, plan.phase.phase_at(u));
                const double rate = 0.5 * (sum_a + sum_b) + sign * std::real(*rot * beat);
                const double bound = plan.bound_scale * (sum_a + sum_b);
                if (uniform01(rng) * bound < rate)
                    emit(trigger, d, t);
            }
            for (auto n = noise[d](rng); n > 0; --n)
            {
                double t;
                if (uniform01(rng) < plan.dark_fraction[d])
                    t = uniform01(rng) * plan.period_ns;
                else
                {
                    const auto& w = uniform01(rng) < plan.bg_weight_a[d] ? plan.window_a : plan.window_b;
                    t = w.start_ns + uniform01(rng) * w.width_ns();
                }
                emit(trigger, d, t);
            }
        }
    }
    std::sort(tags.begin(), tags.end());
    apply_dead_time(tags, plan.dead_ps);
    return tags;
}

TimeTagStream simulate_stream(const NodeModel& node, std::uint64_t master_seed, std::uint64_t point_index,
                              std::uint64_t n_triggers, const McOptions& options)
{
    if (options.trial_size == 0)
        throw PreconditionError("trial size must be positive");
    make_plan(node);  // validate before spawning workers

    const std::uint64_t n_trials = (n_triggers + options.trial_size - 1) / options.trial_size;
    std::vector<std::vector<TimeTag>> parts(n_trials);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&] {
        for (std::uint64_t t = next++; t < n_trials; t = next++)
        {
            try
            {
                const std::uint64_t first = t * options.trial_size;
                const std::uint64_t count = std::min(options.trial_size, n_triggers - first);
                parts[t] = mc_trial(node, TrialKey{master_seed, point_index, t}, first, count);
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                failure = std::current_exception();
            }
        }
    };

    unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_trials, 1)));
    if (threads <= 1)
        worker();
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    TimeTagStream stream;
    stream.header.trigger_period_ps = static_cast<std::uint64_t>(std::llround(node.trigger_period_ns * 1e3));
    stream.header.resolution_ps = static_cast<std::uint64_t>(std::llround(node.detectors[0].resolution_ps));
    stream.header.n_triggers = n_triggers;
    stream.header.master_seed = master_seed;
    std::size_t total = 0;
    for (const auto& p : parts)
        total += p.size();
    stream.tags.reserve(total);
    for (auto& p : parts)
        stream.tags.insert(stream.tags.end(), p.begin(), p.end());
    // Jitter can carry a tag across a trial boundary.
    if (!std::is_sorted(stream.tags.begin(), stream.tags.end()))
        std::sort(stream.tags.begin(), stream.tags.end());
    return stream;
}

}  // namespace homsim
