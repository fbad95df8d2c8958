#include "pigflow/series.hpp"

#include <algorithm>
#include <cmath>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

std::string to_string(ChannelKind k) {
    return k == ChannelKind::StaticBar ? "static" : "dynamic";
}

ChannelKind channel_from_string(const std::string& s) {
    if (s == "static") return ChannelKind::StaticBar;
    if (s == "dynamic") return ChannelKind::DynamicKpa;
    throw Error("unknown channel kind: '" + s + "'");
}

SegmentMeta make_segment(const StationMeta& up, const StationMeta& down) {
    SegmentMeta seg;
    seg.upstream = up.id;
    seg.downstream = down.id;
    seg.length_km = std::abs(down.chainage_km - up.chainage_km);
    if (seg.length_km <= 0.0)
        throw Error("segment " + seg.name() + " has zero length");
    return seg;
}

std::vector<SegmentMeta>
make_segments(const std::vector<StationMeta>& stations) {
    if (stations.size() < 2) throw Error("need at least two stations");
    std::vector<SegmentMeta> out;
    for (std::size_t i = 0; i + 1 < stations.size(); ++i)
        out.push_back(make_segment(stations[i], stations[i + 1]));
    if (stations.size() > 2)
        out.push_back(make_segment(stations.front(), stations.back()));
    return out;
}

PressureSeries load_csv_series(const std::string& path,
                               const std::string& station, ChannelKind channel,
                               double nominal_rate_hz) {
    const std::string text = read_file(path);
    PressureSeries s;
    s.station = station;
    s.channel = channel;
    s.nominal_rate_hz = nominal_rate_hz;

    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line_no == 1) {
            if (line != "timestamp_us,value")
                throw ParseError("bad header in " + path +
                                     ", expected 'timestamp_us,value'",
                                 1);
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 2)
            throw ParseError("malformed row in " + path, line_no);
        bool ok1 = false, ok2 = false;
        Timestamp t = parse_int64(fields[0], ok1);
        double v = parse_double(fields[1], ok2);
        if (!ok1 || !ok2)
            throw ParseError("malformed row in " + path, line_no);
        if (!s.timestamps_us.empty() && t <= s.timestamps_us.back())
            throw ParseError("non-monotonic timestamp in " + path, line_no);
        s.timestamps_us.push_back(t);
        s.values.push_back(v);
    }
    return s;
}

void write_csv_series(const PressureSeries& s, const std::string& path) {
    std::string out = "timestamp_us,value\n";
    out.reserve(out.size() + s.size() * 24);
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += std::to_string(s.timestamps_us[i]);
        out += ',';
        out += format_double(s.values[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_uniform_csv(const UniformSeries& u, const std::string& path,
                       const std::string& value_header) {
    std::string out = "bin_start_us," + value_header + "\n";
    out.reserve(out.size() + u.size() * 24);
    for (std::size_t i = 0; i < u.size(); ++i) {
        out += std::to_string(u.bin_start(i));
        out += ',';
        if (!is_missing(u.values[i])) out += format_double(u.values[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

UniformSeries load_uniform_csv(const std::string& path) {
    const std::string text = read_file(path);
    UniformSeries u;
    std::vector<Timestamp> starts;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != 2)
            throw ParseError("malformed row in " + path, line_no);
        bool ok = false;
        starts.push_back(parse_int64(fields[0], ok));
        if (!ok) throw ParseError("malformed row in " + path, line_no);
        if (fields[1].empty()) {
            u.values.push_back(kMissing);
        } else {
            double v = parse_double(fields[1], ok);
            if (!ok) throw ParseError("malformed row in " + path, line_no);
            u.values.push_back(v);
        }
    }
    if (starts.empty()) return u;
    u.start_us = starts.front();
    u.step_us = starts.size() > 1 ? starts[1] - starts[0] : kMicrosPerSecond;
    if (u.step_us <= 0) throw ParseError("non-increasing grid in " + path, 3);
    for (std::size_t i = 0; i < starts.size(); ++i)
        if (starts[i] != u.bin_start(i))
            throw ParseError("irregular grid in " + path, i + 2);
    return u;
}

UniformSeries resample_uniform(const PressureSeries& s, double step_s,
                               Reducer reducer) {
    if (!(step_s > 0)) throw Error("resample step must be positive");
    UniformSeries u;
    u.step_us = seconds_to_us(step_s);
    if (u.step_us <= 0) throw Error("resample step must be >= 1 microsecond");
    if (s.empty()) return u;

    u.start_us = floor_div(s.timestamps_us.front(), u.step_us) * u.step_us;
    const std::int64_t n_bins =
        floor_div(s.timestamps_us.back() - u.start_us, u.step_us) + 1;
    u.values.assign(static_cast<std::size_t>(n_bins), kMissing);

    std::vector<std::int64_t> counts(u.values.size(), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto bin = static_cast<std::size_t>(
            floor_div(s.timestamps_us[i] - u.start_us, u.step_us));
        const double v = s.values[i];
        double& acc = u.values[bin];
        if (counts[bin] == 0) {
            acc = v;
        } else {
            switch (reducer) {
            case Reducer::Mean: acc += v; break;
            case Reducer::Min: acc = std::min(acc, v); break;
            case Reducer::Max: acc = std::max(acc, v); break;
            }
        }
        ++counts[bin];
    }
    if (reducer == Reducer::Mean)
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (counts[i] > 0) u.values[i] /= static_cast<double>(counts[i]);
    return u;
}

std::vector<std::pair<std::size_t, std::size_t>>
detect_gaps(const UniformSeries& u) {
    std::vector<std::pair<std::size_t, std::size_t>> gaps;
    std::size_t i = 0;
    while (i < u.size()) {
        if (is_missing(u.values[i])) {
            std::size_t j = i;
            while (j + 1 < u.size() && is_missing(u.values[j + 1])) ++j;
            gaps.emplace_back(i, j);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return gaps;
}

UniformSeries slice_interval(const UniformSeries& u, Timestamp from,
                             Timestamp to) {
    if (from >= to) throw Error("slice_interval: 'from' must precede 'to'");
    UniformSeries out;
    out.step_us = u.step_us;
    if (u.empty() || u.step_us <= 0) {
        out.start_us = u.start_us;
        return out;
    }
    // First bin whose start >= from; bins starting at or past `to` excluded.
    std::int64_t first = floor_div(from - u.start_us + u.step_us - 1, u.step_us);
    std::int64_t last = floor_div(to - u.start_us - 1, u.step_us); // inclusive
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last,
                                  static_cast<std::int64_t>(u.size()) - 1);
    if (first > last) {
        out.start_us = u.start_us + first * u.step_us;
        return out;
    }
    out.start_us = u.bin_start(static_cast<std::size_t>(first));
    out.values.assign(u.values.begin() + first, u.values.begin() + last + 1);
    return out;
}

} // namespace pigflow
