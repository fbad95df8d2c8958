#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "pigflow/time.hpp"

namespace pigflow {

/// Gap marker inside a UniformSeries. Pressure values are always finite,
/// so NaN is unambiguous.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

enum class ChannelKind {
    StaticBar,  // absolute pressure transducer, bar
    DynamicKpa, // dynamic hydrophone, kPa
};

std::string to_string(ChannelKind k);
ChannelKind channel_from_string(const std::string& s);

/// Raw timestamped samples for one station/channel. Timestamps are
/// strictly increasing; values finite.
struct PressureSeries {
    std::string station;
    ChannelKind channel = ChannelKind::StaticBar;
    double nominal_rate_hz = 1.0;
    std::vector<Timestamp> timestamps_us;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
};

/// Regular-grid series. Bin k covers [start_us + k*step_us,
/// start_us + (k+1)*step_us); gaps are explicit kMissing bins. The grid
/// is epoch-aligned (start_us is a multiple of step_us) so resampled
/// series from different stations always share bin boundaries.
struct UniformSeries {
    Timestamp start_us = 0;
    std::int64_t step_us = 0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    double step_s() const { return us_to_seconds(step_us); }
    Timestamp bin_start(std::size_t i) const {
        return start_us + static_cast<std::int64_t>(i) * step_us;
    }
    Timestamp end_us() const { return bin_start(values.size()); }
    /// Index of the bin containing t, or -1 when outside the series.
    std::int64_t index_of(Timestamp t) const {
        if (step_us <= 0) return -1;
        std::int64_t i = floor_div(t - start_us, step_us);
        return (i >= 0 && i < static_cast<std::int64_t>(values.size())) ? i
                                                                        : -1;
    }
};

/// Chainage and altitude for one station (chainage measured from the
/// pumping terminal; exactly one station sits at chainage 0).
struct StationMeta {
    std::string id;
    double chainage_km = 0.0;
    double altitude_m = 0.0;
};

/// Ordered station pair. length_km is the chainage difference.
struct SegmentMeta {
    std::string upstream;
    std::string downstream;
    double length_km = 0.0;

    std::string name() const { return upstream + "-" + downstream; }
};

SegmentMeta make_segment(const StationMeta& up, const StationMeta& down);

/// Consecutive pairs plus, for three or more stations, the end-to-end
/// segment: A,B,C -> A-B, B-C, A-C.
std::vector<SegmentMeta> make_segments(const std::vector<StationMeta>& stations);

enum class Reducer { Mean, Min, Max };

// --- file ingestion -------------------------------------------------------

/// Reads the `timestamp_us,value` CSV schema (LF line endings, '.'
/// decimal point). Rejects malformed rows, duplicate and backwards
/// timestamps, reporting the 1-based line number.
PressureSeries load_csv_series(const std::string& path,
                               const std::string& station, ChannelKind channel,
                               double nominal_rate_hz = 1.0);

void write_csv_series(const PressureSeries& s, const std::string& path);

/// Uniform-series CSV: header `bin_start_us,value`, empty field for
/// MISSING bins.
void write_uniform_csv(const UniformSeries& u, const std::string& path,
                       const std::string& value_header = "value");
UniformSeries load_uniform_csv(const std::string& path);

// --- grid operations ------------------------------------------------------

/// Buckets samples onto the epoch-aligned grid of width step_s. Bins
/// without samples are MISSING. Empty input yields an empty series.
UniformSeries resample_uniform(const PressureSeries& s, double step_s,
                               Reducer reducer);

/// Maximal runs of MISSING bins as inclusive [first, last] index pairs.
std::vector<std::pair<std::size_t, std::size_t>>
detect_gaps(const UniformSeries& u);

/// Bins whose start lies in [from, to); grid alignment preserved. A
/// disjoint range yields an empty series on the same grid.
UniformSeries slice_interval(const UniformSeries& u, Timestamp from,
                             Timestamp to);

} // namespace pigflow
