#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pigflow/error.hpp"
#include "pigflow/hydraulics.hpp"

using namespace pigflow;
using testutil::make_uniform;

TEST_CASE("hydrostatic dP reproduces the station table") {
    const FluidProps f; // 900 kg/m3, 9.81 m/s2
    CHECK(std::abs(hydrostatic_dp_pa(f, 180.0) / 1e5 - (-15.8922)) < 1e-4);
    CHECK(std::abs(hydrostatic_dp_pa(f, 379.0) / 1e5 - (-33.4619)) < 1e-4);
    CHECK(hydrostatic_dp_pa(f, 0.0) == 0.0);
}

TEST_CASE("hydrostatic dP is linear in density and altitude, sign opposite dz") {
    const FluidProps f;
    CHECK(hydrostatic_dp_pa(f, 100.0) < 0);
    CHECK(hydrostatic_dp_pa(f, -100.0) > 0);
    CHECK(hydrostatic_dp_pa(f, 200.0) ==
          doctest::Approx(2.0 * hydrostatic_dp_pa(f, 100.0)));
    FluidProps heavy = f;
    heavy.density_kg_m3 = 1800.0;
    CHECK(hydrostatic_dp_pa(heavy, 100.0) ==
          doctest::Approx(2.0 * hydrostatic_dp_pa(f, 100.0)));
}

TEST_CASE("compensation shifts by dP in bar and preserves MISSING") {
    const FluidProps f;
    const double dp = hydrostatic_dp_pa(f, 180.0); // station B
    const auto u = make_uniform(0, 60 * kMicrosPerSecond,
                                {30.0, kMissing, 30.0});
    const UniformSeries comp = compensate(u, dp);
    CHECK(comp.values[0] == doctest::Approx(45.8922).epsilon(1e-9));
    CHECK(is_missing(comp.values[1]));

    SUBCASE("zero dP is the identity") {
        const UniformSeries same = compensate(u, 0.0);
        CHECK(same.values[0] == u.values[0]);
        CHECK(same.values[2] == u.values[2]);
    }
    SUBCASE("compensate then un-compensate is the identity within one ulp") {
        const UniformSeries back = compensate(comp, -dp);
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (is_missing(u.values[i])) continue;
            CHECK(back.values[i] ==
                  doctest::Approx(u.values[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("head loss normalizes the pressure drop by segment length") {
    const SegmentMeta ac{"A", "C", 100.486};
    const auto up = make_uniform(0, 60 * kMicrosPerSecond, {50.0, 50.0, 50.0});
    const auto down =
        make_uniform(0, 60 * kMicrosPerSecond, {36.0, kMissing, 36.0});
    const UniformSeries h = head_loss(up, down, ac);
    REQUIRE(h.size() == 3);
    CHECK(h.values[0] == doctest::Approx(0.13932).epsilon(1e-4));
    CHECK(is_missing(h.values[1]));

    SUBCASE("equal pressures give zero everywhere") {
        const UniformSeries zero = head_loss(up, up, ac);
        for (double v : zero.values) CHECK(v == 0.0);
    }
    SUBCASE("antisymmetric under swapping the stations") {
        const UniformSeries fwd = head_loss(up, down, ac);
        const UniformSeries rev = head_loss(down, up, ac);
        for (std::size_t i = 0; i < fwd.size(); ++i) {
            if (is_missing(fwd.values[i])) {
                CHECK(is_missing(rev.values[i]));
            } else {
                CHECK(rev.values[i] == doctest::Approx(-fwd.values[i]));
            }
        }
    }
    SUBCASE("mismatched grids are rejected") {
        auto odd = down;
        odd.step_us = 30 * kMicrosPerSecond;
        CHECK_THROWS_AS(head_loss(up, odd, ac), Error);
        auto phase = down;
        phase.start_us += 1;
        CHECK_THROWS_AS(head_loss(up, phase, ac), Error);
    }
    SUBCASE("offset but aligned grids overlap correctly") {
        auto shifted = down;
        shifted.start_us = 60 * kMicrosPerSecond; // one bin later
        const UniformSeries h2 = head_loss(up, shifted, ac);
        REQUIRE(h2.size() == 2);
        CHECK(h2.start_us == 60 * kMicrosPerSecond);
    }
}

TEST_CASE("trailing moving average: constant, step, and coverage") {
    const std::int64_t step = 60 * kMicrosPerSecond;

    SUBCASE("constant stays constant wherever output exists") {
        const auto u = make_uniform(0, step, std::vector<double>(100, 0.2));
        const UniformSeries ma = moving_average(u, 600.0);
        for (double v : ma.values)
            if (!is_missing(v)) CHECK(v == doctest::Approx(0.2));
    }
    SUBCASE("unit step ramps up and reaches 1.0 one window after the step") {
        std::vector<double> vals(20, 0.0);
        vals.resize(50, 1.0); // step at bin 20
        const auto u = make_uniform(0, step, vals);
        const UniformSeries ma = moving_average(u, 600.0); // 10-bin window
        // trailing boxcar: the first window fully past the step ends at
        // bin 29, i.e. its right edge sits 600 s after the step onset
        CHECK(ma.values[19] == doctest::Approx(0.0));
        CHECK(ma.values[20] == doctest::Approx(0.1));
        CHECK(ma.values[28] == doctest::Approx(0.9));
        CHECK(ma.values[29] == doctest::Approx(1.0));
        CHECK(ma.values[35] == doctest::Approx(1.0));
    }
    SUBCASE("output stays inside the window's min/max") {
        std::mt19937_64 rng(9);
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> vals(500);
        for (auto& v : vals) v = g(rng);
        const auto u = make_uniform(0, step, vals);
        const UniformSeries ma = moving_average(u, 1800.0);
        for (std::size_t i = 0; i < ma.size(); ++i) {
            if (is_missing(ma.values[i])) continue;
            double lo = 1e300, hi = -1e300;
            for (std::size_t j = i >= 29 ? i - 29 : 0; j <= i; ++j) {
                lo = std::min(lo, u.values[j]);
                hi = std::max(hi, u.values[j]);
            }
            CHECK(ma.values[i] >= lo - 1e-12);
            CHECK(ma.values[i] <= hi + 1e-12);
        }
    }
    SUBCASE("a series shorter than the coverage rule is all MISSING") {
        // 7-day window over a 2-hour series: coverage never reaches 10%
        const auto u = make_uniform(0, step, std::vector<double>(120, 1.0));
        const UniformSeries ma = moving_average(u); // 1 week default
        for (double v : ma.values) CHECK(is_missing(v));
    }
    SUBCASE("gaps drop coverage below the 10% floor") {
        std::vector<double> vals(100, kMissing);
        vals[50] = 5.0; // single sample in a 10-bin window: 10% coverage
        const auto u = make_uniform(0, step, vals);
        const UniformSeries ma = moving_average(u, 600.0, 0.10);
        CHECK(ma.values[50] == doctest::Approx(5.0)); // exactly at the floor
        const UniformSeries strict = moving_average(u, 600.0, 0.2);
        CHECK(is_missing(strict.values[50]));
    }
}

TEST_CASE("density error bound matches the derived sensitivities") {
    const FluidProps assumed; // 900
    CHECK(std::abs(density_error_bound_bar(assumed, 830.0, 379.0) - 2.603) <
          1e-3);
    CHECK(std::abs(density_error_bound_bar(assumed, 1000.0, 180.0) - 1.766) <
          1e-3);
    CHECK(density_error_bound_bar(assumed, 900.0, 379.0) == 0.0);
    // the paper's "at most 3 bar" headline is exceeded at station C for
    // the heaviest crude; the exact bound is reported, never clamped
    CHECK(density_error_bound_bar(assumed, 1000.0, 379.0) ==
          doctest::Approx(3.71799).epsilon(1e-6));
}

TEST_CASE("head loss csv round trip") {
    testutil::TempDir dir("hl");
    HeadLossSeries h;
    h.segment = SegmentMeta{"A", "B", 59.307};
    h.short_term = make_uniform(0, 60 * kMicrosPerSecond,
                                {0.1, kMissing, 0.3});
    h.long_term = make_uniform(0, 60 * kMicrosPerSecond,
                               {kMissing, kMissing, 0.2});
    write_head_loss_csv(h, dir.file("h.csv"));
    const HeadLossSeries back = load_head_loss_csv(dir.file("h.csv"), h.segment);
    CHECK(back.short_term.values[0] == 0.1);
    CHECK(is_missing(back.short_term.values[1]));
    CHECK(back.long_term.values[2] == 0.2);
    CHECK(is_missing(back.long_term.values[0]));
}
