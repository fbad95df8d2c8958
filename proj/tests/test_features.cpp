#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pigflow/error.hpp"
#include "pigflow/features.hpp"

using namespace pigflow;
using testutil::make_uniform;

namespace {
constexpr std::int64_t kMinute = 60 * kMicrosPerSecond;
}

TEST_CASE("mapping anchors sit at the configured percentiles") {
    SUBCASE("uniform values on [0.1, 0.3]") {
        std::vector<double> vals(5000);
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] = 0.1 + 0.2 * static_cast<double>(i) /
                                static_cast<double>(vals.size() - 1);
        // shuffle so percentiles do the sorting work
        std::mt19937_64 rng(1);
        std::shuffle(vals.begin(), vals.end(), rng);
        const auto u = make_uniform(0, kMinute, vals);
        const MappingConfig m = fit_mapping(u, 0, u.end_us());
        CHECK(std::abs(m.h_lo - 0.102) < 0.002);
        CHECK(std::abs(m.h_hi - 0.298) < 0.002);
    }
    SUBCASE("linear ramp 0..1") {
        std::vector<double> vals(2000);
        for (std::size_t i = 0; i < vals.size(); ++i)
            vals[i] = static_cast<double>(i) /
                      static_cast<double>(vals.size() - 1);
        const auto u = make_uniform(0, kMinute, vals);
        const MappingConfig m = fit_mapping(u, 0, u.end_us());
        CHECK(std::abs(m.h_lo - 0.01) < 0.002);
        CHECK(std::abs(m.h_hi - 0.99) < 0.002);
    }
    SUBCASE("constant training data is degenerate") {
        const auto u = make_uniform(0, kMinute, std::vector<double>(2000, 0.2));
        CHECK_THROWS_AS(fit_mapping(u, 0, u.end_us()), Error);
    }
    SUBCASE("too little data is an error") {
        const auto u = make_uniform(0, kMinute, std::vector<double>(999, 0.2));
        CHECK_THROWS_AS(fit_mapping(u, 0, u.end_us()), Error);
    }
}

TEST_CASE("indicator maps anchors to 0/1, midpoint to 0.5, clamps outside") {
    MappingConfig m;
    m.h_lo = 0.1;
    m.h_hi = 0.3;
    const auto u = make_uniform(
        0, kMinute, {0.1, 0.3, 0.2, 0.05, 0.42, kMissing});
    const UniformSeries y = build_pig_indicator(u, m);
    CHECK(y.values[0] == 0.0);
    CHECK(y.values[1] == 1.0);
    CHECK(y.values[2] == doctest::Approx(0.5));
    CHECK(y.values[3] == 0.0); // clamped below
    CHECK(y.values[4] == 1.0); // clamped above
    CHECK(is_missing(y.values[5]));
}

TEST_CASE("indicator is monotone and bounded on random input") {
    MappingConfig m;
    m.h_lo = 0.08;
    m.h_hi = 0.31;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> v(-0.2, 0.6);
    std::vector<double> vals(5000);
    for (auto& x : vals) x = v(rng);
    const auto u = make_uniform(0, kMinute, vals);
    const UniformSeries y = build_pig_indicator(u, m);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        CHECK(y.values[i] >= 0.0);
        CHECK(y.values[i] <= 1.0);
        for (std::size_t j = i + 1; j < std::min(vals.size(), i + 4); ++j) {
            if (vals[i] <= vals[j]) CHECK(y.values[i] <= y.values[j] + 1e-15);
        }
    }
}

TEST_CASE("rolling features on a constant series all equal the constant") {
    const auto u =
        make_uniform(0, kMinute, std::vector<double>(2000, 0.2));
    const auto rows = rolling_features(u);
    REQUIRE(!rows.empty());
    // first row appears once the 24 h window has 50% coverage
    CHECK(rows.front().t_us == u.bin_start(719));
    for (const auto& r : rows)
        for (double f : r.values) CHECK(f == doctest::Approx(0.2));
}

TEST_CASE("rolling features on a rising ramp order means by window length") {
    // 24 h of linear rise to v = 1.44; trailing means over shorter
    // windows sit closer to the endpoint
    const std::size_t n = 1440;
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i)
        vals[i] = 0.001 * static_cast<double>(i + 1);
    const auto u = make_uniform(0, kMinute, vals);
    const auto rows = rolling_features(u);
    REQUIRE(!rows.empty());
    const FeatureRow& last = rows.back();
    REQUIRE(last.t_us == u.bin_start(n - 1));
    const double v = vals.back();
    // max over any trailing window is the endpoint
    CHECK(last.values[2] == doctest::Approx(v));  // max8
    CHECK(last.values[5] == doctest::Approx(v));  // max16
    CHECK(last.values[8] == doctest::Approx(v));  // max24
    CHECK(last.values[6] < last.values[3]);       // mean24 < mean16
    CHECK(last.values[3] < last.values[0]);       // mean16 < mean8
    // closed form: mean of the last k samples of an arithmetic ramp
    const auto ramp_mean = [&](std::size_t k) {
        return 0.001 * (static_cast<double>(n) -
                        static_cast<double>(k - 1) / 2.0);
    };
    CHECK(last.values[0] == doctest::Approx(ramp_mean(480)).epsilon(1e-12));
    CHECK(last.values[3] == doctest::Approx(ramp_mean(960)).epsilon(1e-12));
    CHECK(last.values[6] == doctest::Approx(ramp_mean(1440)).epsilon(1e-12));
}

TEST_CASE("a gap covering most of the 8h window excludes the row") {
    std::vector<double> vals(2000, 0.2);
    // 60% of the 8 h window before bin 1500 is missing
    for (std::size_t i = 1212; i < 1500; ++i) vals[i] = kMissing;
    const auto u = make_uniform(0, kMinute, vals);
    const auto rows = rolling_features(u);
    bool found_1499 = false;
    for (const auto& r : rows)
        if (r.t_us == u.bin_start(1499)) found_1499 = true;
    CHECK(!found_1499);
}

TEST_CASE("feature ordering and nesting invariants hold on noisy gappy data") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.2, 0.05);
    std::uniform_real_distribution<double> gapper(0.0, 1.0);
    std::vector<double> vals(5000);
    for (auto& v : vals) v = gapper(rng) < 0.2 ? kMissing : g(rng);
    const auto u = make_uniform(0, kMinute, vals);
    const auto rows = rolling_features(u);
    REQUIRE(!rows.empty());
    for (const auto& r : rows) {
        for (int w = 0; w < 3; ++w) {
            const double mean = r.values[3 * w + 0];
            const double mn = r.values[3 * w + 1];
            const double mx = r.values[3 * w + 2];
            CHECK(mn <= mean + 1e-12);
            CHECK(mean <= mx + 1e-12);
        }
        CHECK(r.values[7] <= r.values[1] + 1e-12); // min24 <= min8
        CHECK(r.values[8] >= r.values[2] - 1e-12); // max24 >= max8
    }
}

TEST_CASE("dataset assembly inner-joins features with the indicator") {
    std::vector<FeatureRow> features;
    for (int i = 0; i < 10; ++i) {
        FeatureRow r;
        r.t_us = i * kMinute;
        r.values.fill(0.5);
        features.push_back(r);
    }
    SUBCASE("complete overlap keeps every row") {
        const auto y = make_uniform(0, kMinute, std::vector<double>(10, 0.7));
        const Dataset d = assemble_dataset(features, y);
        CHECK(d.size() == 10);
        CHECK(d.y[0] == 0.7);
    }
    SUBCASE("disjoint spans are an error") {
        const auto y = make_uniform(100 * kMinute, kMinute,
                                    std::vector<double>(10, 0.7));
        CHECK_THROWS_AS(assemble_dataset(features, y), Error);
    }
    SUBCASE("MISSING targets drop their rows") {
        std::vector<double> vals(10, 0.7);
        for (std::size_t i = 1; i < 10; i += 2) vals[i] = kMissing;
        const auto y = make_uniform(0, kMinute, vals);
        const Dataset d = assemble_dataset(features, y);
        CHECK(d.size() == 5);
        for (Timestamp t : d.t_us) CHECK((t / kMinute) % 2 == 0);
    }
}

TEST_CASE("dataset csv round trip with the exact contract header") {
    testutil::TempDir dir("ds");
    Dataset d;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> v(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        d.t_us.push_back(i * kMinute);
        std::array<double, kFeatureCount> x{};
        for (auto& f : x) f = v(rng);
        d.x.push_back(x);
        d.y.push_back(v(rng));
    }
    write_dataset_csv(d, dir.file("d.csv"));
    const std::string text = testutil::slurp(dir.file("d.csv"));
    CHECK(text.substr(0, text.find('\n')) ==
          "t_us,mean8,min8,max8,mean16,min16,max16,mean24,min24,max24,target");
    const Dataset back = load_dataset_csv(dir.file("d.csv"));
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.t_us[i] == d.t_us[i]);
        CHECK(back.x[i] == d.x[i]); // bit-exact round trip
        CHECK(back.y[i] == d.y[i]);
    }
}

TEST_CASE("mapping csv round trip") {
    testutil::TempDir dir("map");
    MappingConfig m;
    m.h_lo = 0.08123456789;
    m.h_hi = 0.3098765432;
    write_mapping_csv(m, dir.file("m.csv"));
    const MappingConfig back = load_mapping_csv(dir.file("m.csv"));
    CHECK(back.h_lo == m.h_lo);
    CHECK(back.h_hi == m.h_hi);
    CHECK(back.lo_percentile == 1.0);
    CHECK(back.hi_percentile == 99.0);
}
