#include <doctest.h>

#include <algorithm>
#include <random>

#include "homsim/error.hpp"
#include "homsim/roi.hpp"

using namespace homsim;

namespace
{

constexpr std::uint64_t kPeriodPs = 1'000'000;  // 1 us cycles

TimeTag tag(std::uint64_t cycle, double t_ns, std::uint8_t ch)
{
    return {cycle * kPeriodPs + static_cast<std::uint64_t>(std::llround(t_ns * 1e3)), ch};
}

DelayRoiBase pair_base()
{
    DelayRoiBase b;
    b.signal = {5000.0, 5300.0};
    b.filler_start_ns = 7000.0;
    b.cycle_ns = 25000.0;
    return b;
}

}  // namespace

TEST_SUITE("roi")
{
    TEST_CASE("roi construction")
    {
        const Roi r({{500, 600}, {100, 300}});
        CHECK(r.windows().front().start_ns == 100);
        CHECK(r.total_width_ns() == 300.0);
        CHECK(r.contains(100.0));
        CHECK_FALSE(r.contains(300.0));
        CHECK_THROWS_AS(Roi(std::vector<RoiWindow>{}), PreconditionError);
        CHECK_THROWS_AS(Roi({{0, 200}, {100, 300}}), PreconditionError);
        CHECK_THROWS_AS(Roi({{10, 10}}), PreconditionError);
    }

    TEST_CASE("coincidence needs both channels in the same cycle")
    {
        const Roi roi({{100, 300}});
        std::vector<TimeTag> same{tag(0, 150, 0), tag(0, 200, 1)};
        CHECK(count_in_roi(same, roi, kPeriodPs, 1).c12 == 1);
        std::vector<TimeTag> split{tag(0, 150, 0), tag(1, 200, 1)};
        const auto cs = count_in_roi(split, roi, kPeriodPs, 2);
        CHECK(cs.c12 == 0);
        CHECK(cs.c1 == 1);
        CHECK(cs.c2 == 1);
    }

    TEST_CASE("five hand-enumerated cycles")
    {
        const Roi roi({{100, 300}, {500, 600}});
        std::vector<TimeTag> tags{
            tag(0, 150, 0), tag(0, 550, 1),                      // both: c1, c2, c12
            tag(1, 50, 0), tag(1, 200, 1),                       // ch0 outside: c2
            tag(2, 120, 0), tag(2, 250, 0), tag(2, 700, 1),      // ch0 twice, ch1 outside: c1
            tag(3, 400, 2),                                      // channel 2 ignored
            tag(4, 299.999, 1), tag(4, 300, 0), tag(4, 599, 1),  // ch0 on the open edge: c2
        };
        std::sort(tags.begin(), tags.end());
        CHECK(count_in_roi(tags, roi, kPeriodPs, 5) == CountSummary{2, 3, 1, 5});

        TimeTagStream s;
        s.header.trigger_period_ps = kPeriodPs;
        s.header.n_triggers = 5;
        s.tags = tags;
        CHECK(count_in_roi(s, roi) == CountSummary{2, 3, 1, 5});
        CHECK(count_in_roi({}, roi, kPeriodPs, 5) == CountSummary{0, 0, 0, 5});
        CHECK_THROWS_AS(count_in_roi(tags, roi, 0, 5), PreconditionError);
    }

    TEST_CASE("property: coincidences never exceed singles")
    {
        std::mt19937_64 rng(31);
        std::uniform_int_distribution<std::uint64_t> t(0, 50 * kPeriodPs);
        std::uniform_int_distribution<int> ch(0, 1);
        const Roi roi({{0, 400}, {600, 700}});
        for (int rep = 0; rep < 50; ++rep)
        {
            std::vector<TimeTag> tags(400);
            for (auto& x : tags)
                x = {t(rng), static_cast<std::uint8_t>(ch(rng))};
            std::sort(tags.begin(), tags.end());
            const auto cs = count_in_roi(tags, roi, kPeriodPs, 51);
            CHECK(cs.c12 <= std::min(cs.c1, cs.c2));
            CHECK(cs.c1 <= 51);
            CHECK(cs.c2 <= 51);
        }
    }

    TEST_CASE("delay ROI examples")
    {
        const auto base = pair_base();
        const auto zero = shift_roi_for_delay(base, 0.0, 600.0);
        REQUIRE(zero.windows().size() == 2);
        CHECK(zero.windows()[0] == RoiWindow{5000, 5300});
        CHECK(zero.windows()[1] == RoiWindow{7000, 7300});

        const auto apart = shift_roi_for_delay(base, 300.0, 600.0);
        REQUIRE(apart.windows().size() == 2);
        CHECK(apart.windows()[1] == RoiWindow{5300, 5600});
        const auto far = shift_roi_for_delay(base, -800.0, 600.0);
        REQUIRE(far.windows().size() == 2);
        CHECK(far.windows()[0] == RoiWindow{4200, 4500});
        CHECK(far.total_width_ns() == 600.0);

        const auto half = shift_roi_for_delay(base, 150.0, 600.0);
        REQUIRE(half.windows().size() == 2);
        CHECK(half.windows()[0] == RoiWindow{5000, 5450});
        CHECK(half.windows()[1] == RoiWindow{7000, 7150});
        CHECK(half.total_width_ns() == doctest::Approx(600.0));
    }

    TEST_CASE("delay ROI errors")
    {
        auto base = pair_base();
        CHECK_THROWS_AS(shift_roi_for_delay(base, 0.0, 200.0), PreconditionError);
        CHECK_THROWS_AS(shift_roi_for_delay(base, 25000.0, 600.0), PreconditionError);
        base.filler_start_ns = 5100.0;
        CHECK_THROWS_AS(shift_roi_for_delay(base, 0.0, 600.0), PreconditionError);
        base = pair_base();
        base.signal = {100, 100};
        CHECK_THROWS_AS(shift_roi_for_delay(base, 0.0, 600.0), PreconditionError);
    }

    TEST_CASE("property: total width is preserved for every delay on a dense grid")
    {
        const auto base = pair_base();
        for (int i = -4000; i <= 4000; ++i)
        {
            const double d = 0.25 * i;
            const auto roi = shift_roi_for_delay(base, d, 600.0);
            CHECK(roi.total_width_ns() == doctest::Approx(600.0).epsilon(1e-12));
            double sum = 0.0;
            for (const auto& w : roi.windows())
                sum += w.width_ns();
            CHECK(sum == doctest::Approx(roi.total_width_ns()).epsilon(1e-12));
            CHECK(roi.contains(5000.0));
            CHECK(roi.contains(5000.0 + d));
        }
    }
}
