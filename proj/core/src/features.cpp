#include "pigflow/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

namespace {

double percentile_interpolated(const std::vector<double>& sorted, double p) {
    const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

MappingConfig fit_mapping(const UniformSeries& long_term, Timestamp train_from,
                          Timestamp train_to, MappingConfig base) {
    const UniformSeries train = slice_interval(long_term, train_from, train_to);
    std::vector<double> vals;
    vals.reserve(train.size());
    for (double v : train.values)
        if (!is_missing(v)) vals.push_back(v);
    if (vals.size() < 1000)
        throw Error("fit_mapping: need >= 1000 non-missing training bins, got " +
                    std::to_string(vals.size()));
    std::sort(vals.begin(), vals.end());
    MappingConfig m = base;
    m.h_lo = percentile_interpolated(vals, m.lo_percentile);
    m.h_hi = percentile_interpolated(vals, m.hi_percentile);
    if (!(m.h_lo < m.h_hi))
        throw Error("fit_mapping: degenerate head-loss range (h_lo == h_hi)");
    return m;
}

UniformSeries build_pig_indicator(const UniformSeries& long_term,
                                  const MappingConfig& m) {
    if (!(m.h_lo < m.h_hi)) throw Error("invalid mapping: h_lo >= h_hi");
    UniformSeries y = long_term;
    const double span = m.h_hi - m.h_lo;
    for (double& v : y.values)
        if (!is_missing(v)) v = std::clamp((v - m.h_lo) / span, 0.0, 1.0);
    return y;
}

namespace {

struct RollingStats {
    std::vector<double> mean, mn, mx;
    std::vector<double> coverage;
};

RollingStats rolling_window(const UniformSeries& u, std::size_t w) {
    const std::size_t n = u.size();
    RollingStats rs;
    rs.mean.assign(n, kMissing);
    rs.mn.assign(n, kMissing);
    rs.mx.assign(n, kMissing);
    rs.coverage.assign(n, 0.0);

    double sum = 0.0;
    std::size_t count = 0;
    std::deque<std::size_t> qmin, qmax;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = u.values[i];
        if (!is_missing(v)) {
            sum += v;
            ++count;
            while (!qmin.empty() && u.values[qmin.back()] >= v) qmin.pop_back();
            qmin.push_back(i);
            while (!qmax.empty() && u.values[qmax.back()] <= v) qmax.pop_back();
            qmax.push_back(i);
        }
        if (i >= w) {
            const double leaving = u.values[i - w];
            if (!is_missing(leaving)) {
                sum -= leaving;
                --count;
            }
        }
        const std::size_t window_first = i >= w ? i - w + 1 : 0;
        while (!qmin.empty() && qmin.front() < window_first) qmin.pop_front();
        while (!qmax.empty() && qmax.front() < window_first) qmax.pop_front();

        rs.coverage[i] = static_cast<double>(count) / static_cast<double>(w);
        if (count > 0) {
            rs.mean[i] = sum / static_cast<double>(count);
            rs.mn[i] = u.values[qmin.front()];
            rs.mx[i] = u.values[qmax.front()];
        }
    }
    return rs;
}

} // namespace

std::vector<FeatureRow> rolling_features(const UniformSeries& short_term,
                                         double min_coverage) {
    std::vector<FeatureRow> rows;
    if (short_term.empty()) return rows;
    std::array<std::size_t, 3> wbins{};
    for (std::size_t k = 0; k < 3; ++k) {
        const std::int64_t span_us =
            static_cast<std::int64_t>(kFeatureWindowsHours[k]) * 3600 *
            kMicrosPerSecond;
        if (span_us % short_term.step_us != 0)
            throw Error("rolling_features: grid step must divide the window");
        wbins[k] = static_cast<std::size_t>(span_us / short_term.step_us);
    }
    std::array<RollingStats, 3> stats;
    for (std::size_t k = 0; k < 3; ++k)
        stats[k] = rolling_window(short_term, wbins[k]);

    for (std::size_t i = 0; i < short_term.size(); ++i) {
        bool ok = true;
        for (std::size_t k = 0; k < 3 && ok; ++k)
            ok = stats[k].coverage[i] >= min_coverage;
        if (!ok) continue;
        FeatureRow row;
        row.t_us = short_term.bin_start(i);
        for (std::size_t k = 0; k < 3; ++k) {
            row.values[3 * k + 0] = stats[k].mean[i];
            row.values[3 * k + 1] = stats[k].mn[i];
            row.values[3 * k + 2] = stats[k].mx[i];
        }
        rows.push_back(row);
    }
    return rows;
}

Dataset assemble_dataset(const std::vector<FeatureRow>& features,
                         const UniformSeries& indicator) {
    Dataset d;
    for (const auto& row : features) {
        const std::int64_t idx = indicator.index_of(row.t_us);
        if (idx < 0) continue;
        const double target = indicator.values[static_cast<std::size_t>(idx)];
        if (is_missing(target)) continue;
        d.t_us.push_back(row.t_us);
        d.x.push_back(row.values);
        d.y.push_back(target);
    }
    if (d.empty())
        throw Error("assemble_dataset: no rows with both features and target");
    return d;
}

Dataset slice_dataset(const Dataset& d, Timestamp from, Timestamp to) {
    Dataset out;
    const auto lo = std::lower_bound(d.t_us.begin(), d.t_us.end(), from) -
                    d.t_us.begin();
    const auto hi =
        std::lower_bound(d.t_us.begin(), d.t_us.end(), to) - d.t_us.begin();
    for (auto i = lo; i < hi; ++i) {
        out.t_us.push_back(d.t_us[static_cast<std::size_t>(i)]);
        out.x.push_back(d.x[static_cast<std::size_t>(i)]);
        out.y.push_back(d.y[static_cast<std::size_t>(i)]);
    }
    return out;
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
    std::string out = "t_us";
    for (const char* name : kFeatureNames) {
        out += ',';
        out += name;
    }
    out += ",target\n";
    out.reserve(out.size() + d.size() * 120);
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += std::to_string(d.t_us[i]);
        for (double v : d.x[i]) {
            out += ',';
            out += format_double(v);
        }
        out += ',';
        out += format_double(d.y[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

Dataset load_dataset_csv(const std::string& path) {
    const std::string text = read_file(path);
    Dataset d;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != kFeatureCount + 2)
            throw ParseError("malformed row in " + path, line_no);
        if (line_no == 1) {
            if (fields[0] != "t_us")
                throw ParseError("bad dataset header in " + path, 1);
            for (std::size_t k = 0; k < kFeatureCount; ++k)
                if (fields[k + 1] != kFeatureNames[k])
                    throw ParseError(
                        "dataset column order mismatch in " + path, 1);
            continue;
        }
        bool ok = false;
        d.t_us.push_back(parse_int64(fields[0], ok));
        if (!ok) throw ParseError("malformed row in " + path, line_no);
        std::array<double, kFeatureCount> x{};
        for (std::size_t k = 0; k < kFeatureCount; ++k) {
            x[k] = parse_double(fields[k + 1], ok);
            if (!ok) throw ParseError("malformed row in " + path, line_no);
        }
        d.x.push_back(x);
        d.y.push_back(parse_double(fields.back(), ok));
        if (!ok) throw ParseError("malformed row in " + path, line_no);
    }
    return d;
}

void write_mapping_csv(const MappingConfig& m, const std::string& path) {
    std::string out = "lo_percentile,hi_percentile,h_lo,h_hi\n";
    out += format_double(m.lo_percentile) + "," +
           format_double(m.hi_percentile) + "," + format_double(m.h_lo) + "," +
           format_double(m.h_hi) + "\n";
    write_file_atomic(path, out);
}

MappingConfig load_mapping_csv(const std::string& path) {
    const std::string text = read_file(path);
    const std::size_t nl = text.find('\n');
    if (nl == std::string::npos) throw ParseError("empty mapping file " + path, 1);
    std::size_t end = text.find('\n', nl + 1);
    if (end == std::string::npos) end = text.size();
    auto fields = split_csv(
        std::string_view(text.data() + nl + 1, end - nl - 1));
    if (fields.size() != 4) throw ParseError("malformed mapping " + path, 2);
    MappingConfig m;
    bool ok = false;
    m.lo_percentile = parse_double(fields[0], ok);
    if (ok) m.hi_percentile = parse_double(fields[1], ok);
    if (ok) m.h_lo = parse_double(fields[2], ok);
    if (ok) m.h_hi = parse_double(fields[3], ok);
    if (!ok) throw ParseError("malformed mapping " + path, 2);
    return m;
}

} // namespace pigflow
