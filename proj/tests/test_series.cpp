#include <doctest.h>

#include "helpers.hpp"
#include "pigflow/error.hpp"
#include "pigflow/series.hpp"
#include "pigflow/time.hpp"

using namespace pigflow;
using testutil::make_series;
using testutil::make_uniform;

TEST_CASE("iso8601 round trip") {
    const Timestamp t = parse_iso8601("2013-06-01T00:00:00Z");
    CHECK(t == make_timestamp(2013, 6, 1));
    CHECK(format_iso8601(t) == "2013-06-01T00:00:00Z");
    CHECK(parse_iso8601("2014-12-01") == make_timestamp(2014, 12, 1));
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK_THROWS_AS(parse_iso8601("June 1st, 2013"), Error);
    CHECK_THROWS_AS(parse_iso8601("2013-06-01T00:00:00+02:00"), Error);
}

TEST_CASE("csv ingestion accepts a valid file") {
    testutil::TempDir dir("csv");
    testutil::write_text(dir.file("a_static.csv"),
                         "timestamp_us,value\n0,10\n1000000,10.5\n2000000,11\n");
    const PressureSeries s =
        load_csv_series(dir.file("a_static.csv"), "A", ChannelKind::StaticBar);
    REQUIRE(s.size() == 3);
    CHECK(s.values[0] == 10.0);
    CHECK(s.values[1] == 10.5);
    CHECK(s.values[2] == 11.0);
    CHECK(s.timestamps_us[2] == 2000000);
}

TEST_CASE("csv ingestion rejects backwards timestamps with the line number") {
    testutil::TempDir dir("csv");
    testutil::write_text(dir.file("bad.csv"),
                         "timestamp_us,value\n5000,1.0\n4000,2.0\n");
    try {
        load_csv_series(dir.file("bad.csv"), "A", ChannelKind::StaticBar);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // duplicates are rejected too
    testutil::write_text(dir.file("dup.csv"),
                         "timestamp_us,value\n5000,1.0\n5000,2.0\n");
    CHECK_THROWS_AS(
        load_csv_series(dir.file("dup.csv"), "A", ChannelKind::StaticBar),
        ParseError);
}

TEST_CASE("csv ingestion of a header-only file yields an empty series") {
    testutil::TempDir dir("csv");
    testutil::write_text(dir.file("empty.csv"), "timestamp_us,value\n");
    const PressureSeries s =
        load_csv_series(dir.file("empty.csv"), "A", ChannelKind::StaticBar);
    CHECK(s.size() == 0);
}

TEST_CASE("csv writer round-trips exactly") {
    testutil::TempDir dir("csv");
    const PressureSeries s = make_series(
        {{0, 10.125}, {50000, 0.30000000000000004}, {100000, -7.25}});
    write_csv_series(s, dir.file("rt.csv"));
    const PressureSeries back =
        load_csv_series(dir.file("rt.csv"), "T", ChannelKind::StaticBar);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.timestamps_us[i] == s.timestamps_us[i]);
        CHECK(back.values[i] == s.values[i]); // bit-exact
    }
}

TEST_CASE("resampling a constant 20 Hz series keeps the constant") {
    std::vector<std::pair<Timestamp, double>> samples;
    for (int i = 0; i < 20 * 300; ++i)
        samples.emplace_back(i * 50000LL, 7.0);
    const UniformSeries u =
        resample_uniform(make_series(samples), 60.0, Reducer::Mean);
    REQUIRE(u.size() == 5);
    for (double v : u.values) CHECK(v == doctest::Approx(7.0));

    for (Reducer r : {Reducer::Min, Reducer::Max}) {
        const UniformSeries v = resample_uniform(make_series(samples), 60.0, r);
        for (double x : v.values) CHECK(x == 7.0);
    }
}

TEST_CASE("resampling averages samples within one bin") {
    const auto s = make_series({{0, 1.0}, {30 * kMicrosPerSecond, 3.0}});
    const UniformSeries u = resample_uniform(s, 60.0, Reducer::Mean);
    REQUIRE(u.size() == 1);
    CHECK(u.values[0] == doctest::Approx(2.0)); // (1+3)/2
}

TEST_CASE("resampling marks silent stretches MISSING") {
    std::vector<std::pair<Timestamp, double>> samples;
    for (int i = 0; i < 120; ++i) samples.emplace_back(i * kMicrosPerSecond, 2.0);
    // 600 s silence, then one more minute of data
    for (int i = 0; i < 60; ++i)
        samples.emplace_back((720 + i) * kMicrosPerSecond, 4.0);
    const UniformSeries u =
        resample_uniform(make_series(samples), 60.0, Reducer::Mean);
    REQUIRE(u.size() == 13);
    CHECK(!is_missing(u.values[0]));
    CHECK(!is_missing(u.values[1]));
    for (std::size_t i = 2; i < 12; ++i) CHECK(is_missing(u.values[i]));
    CHECK(!is_missing(u.values[12]));

    // gap detection matches: a bin is MISSING iff no raw sample fell in it
    const auto gaps = detect_gaps(u);
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0] == std::pair<std::size_t, std::size_t>{2, 11});
}

TEST_CASE("mean resampling preserves total mass over covered bins") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> value(-5.0, 40.0);
    std::uniform_int_distribution<Timestamp> gap(10000, 3'000'000);
    std::vector<std::pair<Timestamp, double>> samples;
    Timestamp t = 12345;
    double raw_sum = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double v = value(rng);
        samples.emplace_back(t, v);
        raw_sum += v;
        t += gap(rng);
    }
    const PressureSeries s = make_series(samples);
    const UniformSeries u = resample_uniform(s, 60.0, Reducer::Mean);

    // recount per bin to recover the weighted sum
    double mass = 0.0;
    std::vector<std::int64_t> counts(u.size(), 0);
    for (Timestamp ts : s.timestamps_us)
        counts[static_cast<std::size_t>((ts - u.start_us) / u.step_us)]++;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!is_missing(u.values[i]))
            mass += u.values[i] * static_cast<double>(counts[i]);
    CHECK(mass == doctest::Approx(raw_sum).epsilon(1e-12));
}

TEST_CASE("empty input resamples to an empty series") {
    const UniformSeries u =
        resample_uniform(make_series({}), 60.0, Reducer::Mean);
    CHECK(u.empty());
}

TEST_CASE("detect_gaps enumerates maximal missing runs") {
    CHECK(detect_gaps(make_uniform(0, 1000000, {1, 2, 3})).empty());

    const auto one = detect_gaps(make_uniform(
        0, 1000000, {1, 1, 1, kMissing, kMissing, kMissing, 1, 1, 1, 1}));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::pair<std::size_t, std::size_t>{3, 5});

    const auto two = detect_gaps(make_uniform(
        0, 1000000,
        {kMissing, kMissing, 1, 1, 1, 1, 1, 1, 1, kMissing}));
    REQUIRE(two.size() == 2);
    CHECK(two[0] == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(two[1] == std::pair<std::size_t, std::size_t>{9, 9});
}

TEST_CASE("slice_interval honors half-open bounds and grid alignment") {
    const UniformSeries u = make_uniform(60 * kMicrosPerSecond,
                                         60 * kMicrosPerSecond,
                                         {1, 2, 3, 4, 5});

    SUBCASE("full-range slice is the identity") {
        const UniformSeries s = slice_interval(u, u.start_us, u.end_us());
        CHECK(s.start_us == u.start_us);
        CHECK(s.values == u.values);
    }
    SUBCASE("bin starting exactly at `to` is excluded") {
        const UniformSeries s =
            slice_interval(u, u.start_us, u.bin_start(2));
        REQUIRE(s.size() == 2);
        CHECK(s.values.back() == 2.0);
    }
    SUBCASE("disjoint range yields an empty series") {
        const UniformSeries s =
            slice_interval(u, u.end_us() + kMicrosPerSecond,
                           u.end_us() + 100 * kMicrosPerSecond);
        CHECK(s.empty());
    }
    SUBCASE("re-slicing with the same bounds is idempotent") {
        const Timestamp from = u.bin_start(1), to = u.bin_start(4);
        const UniformSeries once = slice_interval(u, from, to);
        const UniformSeries twice = slice_interval(once, from, to);
        CHECK(once.start_us == twice.start_us);
        CHECK(once.values == twice.values);
    }
    SUBCASE("from inside a bin skips that bin") {
        const UniformSeries s =
            slice_interval(u, u.bin_start(1) + 1, u.end_us());
        REQUIRE(s.size() == 3);
        CHECK(s.values.front() == 3.0);
    }
}

TEST_CASE("uniform csv preserves MISSING") {
    testutil::TempDir dir("ucsv");
    const UniformSeries u =
        make_uniform(0, 60 * kMicrosPerSecond, {1.5, kMissing, 3.25});
    write_uniform_csv(u, dir.file("u.csv"));
    const UniformSeries back = load_uniform_csv(dir.file("u.csv"));
    REQUIRE(back.size() == 3);
    CHECK(back.values[0] == 1.5);
    CHECK(is_missing(back.values[1]));
    CHECK(back.values[2] == 3.25);
    CHECK(back.step_us == u.step_us);
}

TEST_CASE("make_segments builds consecutive pairs plus end-to-end") {
    const auto segs = make_segments(
        {{"A", 0.0, 179.0}, {"B", 59.307, 359.0}, {"C", 100.486, 558.0}});
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].name() == "A-B");
    CHECK(segs[1].name() == "B-C");
    CHECK(segs[2].name() == "A-C");
    CHECK(segs[0].length_km == doctest::Approx(59.307));
    CHECK(segs[1].length_km == doctest::Approx(41.179));
    CHECK(segs[2].length_km == doctest::Approx(100.486));
}
