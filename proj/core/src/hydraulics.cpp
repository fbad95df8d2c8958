#include "pigflow/hydraulics.hpp"

#include <algorithm>
#include <cmath>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

double hydrostatic_dp_pa(const FluidProps& f, double dz_m) {
    return -f.density_kg_m3 * f.gravity_m_s2 * dz_m;
}

CompensationEntry make_compensation(const FluidProps& f,
                                    const StationMeta& station,
                                    const StationMeta& reference) {
    CompensationEntry e;
    e.station = station.id;
    e.dz_m = station.altitude_m - reference.altitude_m;
    e.dp_pa = hydrostatic_dp_pa(f, e.dz_m);
    return e;
}

UniformSeries compensate(const UniformSeries& u_bar, double dp_pa) {
    UniformSeries out = u_bar;
    const double dp_bar = dp_pa / 1e5;
    for (double& v : out.values)
        if (!is_missing(v)) v -= dp_bar;
    return out;
}

namespace {

// Overlapping index ranges of two series on the same (step, phase) grid.
struct Overlap {
    std::size_t a_first, b_first, count;
    Timestamp start_us;
};

Overlap align_grids(const UniformSeries& a, const UniformSeries& b) {
    if (a.step_us != b.step_us)
        throw Error("grid mismatch: steps differ");
    if (a.step_us <= 0) throw Error("grid mismatch: empty grid");
    if ((a.start_us - b.start_us) % a.step_us != 0)
        throw Error("grid mismatch: bin phases differ");
    const Timestamp start = std::max(a.start_us, b.start_us);
    const Timestamp end = std::min(a.end_us(), b.end_us());
    Overlap ov{0, 0, 0, start};
    if (end <= start) return ov;
    ov.a_first = static_cast<std::size_t>((start - a.start_us) / a.step_us);
    ov.b_first = static_cast<std::size_t>((start - b.start_us) / b.step_us);
    ov.count = static_cast<std::size_t>((end - start) / a.step_us);
    return ov;
}

} // namespace

UniformSeries head_loss(const UniformSeries& up, const UniformSeries& down,
                        const SegmentMeta& seg) {
    if (!(seg.length_km > 0)) throw Error("segment length must be positive");
    const Overlap ov = align_grids(up, down);
    UniformSeries out;
    out.step_us = up.step_us;
    out.start_us = ov.start_us;
    out.values.resize(ov.count, kMissing);
    for (std::size_t i = 0; i < ov.count; ++i) {
        const double u = up.values[ov.a_first + i];
        const double d = down.values[ov.b_first + i];
        if (!is_missing(u) && !is_missing(d))
            out.values[i] = (u - d) / seg.length_km;
    }
    return out;
}

UniformSeries moving_average(const UniformSeries& u, double window_s,
                             double min_coverage) {
    UniformSeries out = u;
    if (u.empty()) return out;
    if (window_s < u.step_s())
        throw Error("moving-average window shorter than the series step");
    const auto win =
        static_cast<std::size_t>(seconds_to_us(window_s) / u.step_us);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!is_missing(u.values[i])) {
            sum += u.values[i];
            ++count;
        }
        if (i >= win) {
            const double leaving = u.values[i - win];
            if (!is_missing(leaving)) {
                sum -= leaving;
                --count;
            }
        }
        const double coverage =
            static_cast<double>(count) / static_cast<double>(win);
        out.values[i] = (count > 0 && coverage >= min_coverage)
                            ? sum / static_cast<double>(count)
                            : kMissing;
    }
    return out;
}

double density_error_bound_bar(const FluidProps& assumed, double rho_true,
                               double dz_m) {
    return std::abs(rho_true - assumed.density_kg_m3) * assumed.gravity_m_s2 *
           std::abs(dz_m) / 1e5;
}

HeadLossSeries build_head_loss(const UniformSeries& up_compensated,
                               const UniformSeries& down_compensated,
                               const SegmentMeta& seg,
                               double smoothing_window_s) {
    HeadLossSeries h;
    h.segment = seg;
    h.short_term = head_loss(up_compensated, down_compensated, seg);
    h.long_term = moving_average(h.short_term, smoothing_window_s);
    return h;
}

void write_head_loss_csv(const HeadLossSeries& h, const std::string& path) {
    std::string out =
        "bin_start_us,short_term_bar_per_km,long_term_bar_per_km\n";
    out.reserve(out.size() + h.short_term.size() * 40);
    for (std::size_t i = 0; i < h.short_term.size(); ++i) {
        out += std::to_string(h.short_term.bin_start(i));
        out += ',';
        if (!is_missing(h.short_term.values[i]))
            out += format_double(h.short_term.values[i]);
        out += ',';
        if (i < h.long_term.size() && !is_missing(h.long_term.values[i]))
            out += format_double(h.long_term.values[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

HeadLossSeries load_head_loss_csv(const std::string& path,
                                  const SegmentMeta& seg) {
    const std::string text = read_file(path);
    HeadLossSeries h;
    h.segment = seg;
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
        if (fields.size() != 3)
            throw ParseError("malformed row in " + path, line_no);
        bool ok = false;
        starts.push_back(parse_int64(fields[0], ok));
        if (!ok) throw ParseError("malformed row in " + path, line_no);
        for (int f = 1; f <= 2; ++f) {
            auto& vec = f == 1 ? h.short_term.values : h.long_term.values;
            if (fields[f].empty()) {
                vec.push_back(kMissing);
            } else {
                const double v = parse_double(fields[f], ok);
                if (!ok) throw ParseError("malformed row in " + path, line_no);
                vec.push_back(v);
            }
        }
    }
    if (!starts.empty()) {
        h.short_term.start_us = starts.front();
        h.short_term.step_us =
            starts.size() > 1 ? starts[1] - starts[0] : kMicrosPerSecond;
        h.long_term.start_us = h.short_term.start_us;
        h.long_term.step_us = h.short_term.step_us;
    }
    return h;
}

} // namespace pigflow
