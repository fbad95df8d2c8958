#include "pigflow/pigtrack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pigflow/error.hpp"
#include "pigflow/fft.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

XcorrResult windowed_xcorr(std::span<const double> a,
                           std::span<const double> b, int max_lag_samples) {
    if (a.size() != b.size())
        throw Error("windowed_xcorr: windows must have equal length");
    if (max_lag_samples < 1) throw Error("windowed_xcorr: max lag must be >= 1");
    const std::size_t n = a.size();
    if (n <= 2 * static_cast<std::size_t>(max_lag_samples))
        throw Error("windowed_xcorr: window length must exceed 2*max_lag");

    XcorrResult res;
    res.max_lag_samples = max_lag_samples;
    res.r.assign(2 * static_cast<std::size_t>(max_lag_samples) + 1, 0.0);

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    std::vector<double> ac(n), bc(n + 2 * max_lag_samples, 0.0);
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ac[i] = a[i] - mean_a;
        sa += ac[i] * ac[i];
        const double bv = b[i] - mean_b;
        bc[i + max_lag_samples] = bv;
        sb += bv * bv;
    }
    if (sa <= 0.0 || sb <= 0.0) {
        res.zero_variance = true;
        return res;
    }

    // num[o] = sum_i ac[i]*bc[i+o], lag = o - max_lag.
    const std::vector<double> num = detail::correlate_sums(ac, bc);
    const double norm = std::sqrt(sa) * std::sqrt(sb);
    for (std::size_t o = 0; o < res.r.size(); ++o)
        res.r[o] = std::clamp(num[o] / norm, -1.0, 1.0);
    return res;
}

namespace {

struct GridRef {
    // Global bin index of a timestamp on the shared grid.
    std::int64_t start_bin;
    std::int64_t count;
};

} // namespace

CorrelationMap build_correlation_map(const UniformSeries& a,
                                     const UniformSeries& b,
                                     const TrackerConfig& cfg) {
    if (a.step_us != b.step_us || a.step_us <= 0)
        throw Error("build_correlation_map: series must share the sample grid");
    if ((a.start_us - b.start_us) % a.step_us != 0)
        throw Error("build_correlation_map: bin phases differ");
    const std::int64_t step = a.step_us;
    const Timestamp start = std::max(a.start_us, b.start_us);
    const Timestamp end = std::min(a.end_us(), b.end_us());
    if (end <= start)
        throw Error("build_correlation_map: series do not overlap in time");

    const auto win = static_cast<std::int64_t>(seconds_to_us(cfg.window_s) / step);
    const auto hop = static_cast<std::int64_t>(seconds_to_us(cfg.hop_s) / step);
    const auto max_lag =
        static_cast<std::int64_t>(seconds_to_us(cfg.max_lag_s) / step);
    if (win < 2 || hop < 1 || max_lag < 1)
        throw Error("build_correlation_map: window/hop/lag too small for grid");

    CorrelationMap map;
    map.sample_step_s = us_to_seconds(step);
    map.hop_s = us_to_seconds(hop * step);
    map.lag_axis_s.resize(static_cast<std::size_t>(2 * max_lag + 1));
    for (std::size_t i = 0; i < map.lag_axis_s.size(); ++i)
        map.lag_axis_s[i] =
            us_to_seconds((static_cast<std::int64_t>(i) - max_lag) * step);

    const GridRef ga{floor_div(a.start_us, step), static_cast<std::int64_t>(a.size())};
    const GridRef gb{floor_div(b.start_us, step), static_cast<std::int64_t>(b.size())};
    const std::int64_t first_bin = floor_div(start, step);
    const std::int64_t last_bin = floor_div(end, step); // exclusive

    const std::size_t n_lags = map.lag_axis_s.size();
    std::vector<double> awin(static_cast<std::size_t>(win));
    std::vector<double> bext(static_cast<std::size_t>(win + 2 * max_lag));

    for (std::int64_t s = first_bin; s + win <= last_bin; s += hop) {
        map.time_bins_us.push_back((s + win / 2) * step);
        map.values.emplace_back(n_lags, 0.0);
        map.flagged.push_back(0);
        auto& col = map.values.back();

        bool bad = false;
        for (std::int64_t i = 0; i < win && !bad; ++i) {
            const std::int64_t ia = s + i - ga.start_bin;
            if (ia < 0 || ia >= ga.count ||
                is_missing(a.values[static_cast<std::size_t>(ia)]))
                bad = true;
            else
                awin[static_cast<std::size_t>(i)] =
                    a.values[static_cast<std::size_t>(ia)];
        }
        for (std::int64_t i = 0; i < win + 2 * max_lag && !bad; ++i) {
            const std::int64_t ib = s - max_lag + i - gb.start_bin;
            if (ib < 0 || ib >= gb.count ||
                is_missing(b.values[static_cast<std::size_t>(ib)]))
                bad = true;
            else
                bext[static_cast<std::size_t>(i)] =
                    b.values[static_cast<std::size_t>(ib)];
        }
        if (bad) {
            map.flagged.back() = 1;
            continue;
        }

        double mean_a = 0.0;
        for (double v : awin) mean_a += v;
        mean_a /= static_cast<double>(win);
        std::vector<double> ac(awin.size());
        double sa = 0.0;
        for (std::size_t i = 0; i < awin.size(); ++i) {
            ac[i] = awin[i] - mean_a;
            sa += ac[i] * ac[i];
        }
        if (sa <= 0.0) {
            map.flagged.back() = 1;
            continue;
        }

        // Prefix sums over the extended b window give the per-lag local
        // mean and energy, so every lag is normalized over exactly the
        // overlapping L samples (|R| <= 1 by Cauchy-Schwarz).
        std::vector<double> ps(bext.size() + 1, 0.0), ps2(bext.size() + 1, 0.0);
        for (std::size_t i = 0; i < bext.size(); ++i) {
            ps[i + 1] = ps[i] + bext[i];
            ps2[i + 1] = ps2[i] + bext[i] * bext[i];
        }
        const std::vector<double> num = detail::correlate_sums(ac, bext);
        for (std::size_t o = 0; o < n_lags; ++o) {
            const double sum_b = ps[o + win] - ps[o];
            const double sum_b2 = ps2[o + win] - ps2[o];
            const double sb =
                sum_b2 - sum_b * sum_b / static_cast<double>(win);
            if (sb <= 0.0) {
                col[o] = 0.0;
                continue;
            }
            col[o] = std::clamp(num[o] / (std::sqrt(sa) * std::sqrt(sb)),
                                -1.0, 1.0);
        }
    }
    return map;
}

double lag_to_position_m(double lag_s, double baseline_lag_s,
                         const TrackerConfig& cfg, double length_m) {
    if (!(cfg.sound_speed_m_s > 0)) throw Error("sound speed must be positive");
    const double x = cfg.sound_speed_m_s * (lag_s - baseline_lag_s) / 2.0;
    return std::clamp(x, 0.0, length_m);
}

double position_to_lag_s(double x_m, double baseline_lag_s,
                         const TrackerConfig& cfg) {
    return baseline_lag_s + 2.0 * x_m / cfg.sound_speed_m_s;
}

namespace {

struct Candidate {
    std::size_t column;
    std::size_t lag_index;
    double score;
};

} // namespace

std::optional<Trajectory> extract_trajectory(const CorrelationMap& map,
                                             const TrackerConfig& cfg,
                                             const SegmentMeta& seg) {
    if (map.empty()) return std::nullopt;
    const std::size_t n_lags = map.lag_axis_s.size();
    std::size_t n_valid = 0;

    // Direct-arrival ridge: the lag whose column-mean correlation is
    // largest. Subtracting the mean profile suppresses the stationary
    // ridge (and its sidelobes) while a moving echo barely contributes
    // to any single lag's mean.
    std::vector<double> profile(n_lags, 0.0);
    for (std::size_t c = 0; c < map.values.size(); ++c) {
        if (map.flagged[c]) continue;
        ++n_valid;
        for (std::size_t l = 0; l < n_lags; ++l) profile[l] += map.values[c][l];
    }
    if (n_valid == 0) return std::nullopt;
    for (double& p : profile) p /= static_cast<double>(n_valid);
    const std::size_t tau0_idx = static_cast<std::size_t>(
        std::max_element(profile.begin(), profile.end()) - profile.begin());
    const double tau0 = map.lag_axis_s[tau0_idx];

    std::vector<Candidate> cands;
    std::vector<std::pair<std::size_t, std::size_t>> col_ranges; // into cands
    std::vector<std::size_t> col_of_range;
    for (std::size_t c = 0; c < map.values.size(); ++c) {
        if (map.flagged[c]) continue;
        const auto& col = map.values[c];
        std::vector<Candidate> local;
        for (std::size_t l = 1; l + 1 < n_lags; ++l) {
            if (std::abs(map.lag_axis_s[l] - tau0) <= cfg.baseline_exclusion_s)
                continue;
            const double r = col[l] - profile[l];
            if (r < cfg.min_peak_score) continue;
            if (col[l] - profile[l] < col[l - 1] - profile[l - 1] ||
                col[l] - profile[l] < col[l + 1] - profile[l + 1])
                continue;
            local.push_back({c, l, std::clamp(r, 0.0, 1.0)});
        }
        std::sort(local.begin(), local.end(),
                  [](const Candidate& x, const Candidate& y) {
                      if (x.score != y.score) return x.score > y.score;
                      return x.lag_index < y.lag_index;
                  });
        if (local.size() >
            static_cast<std::size_t>(cfg.max_candidates_per_column))
            local.resize(
                static_cast<std::size_t>(cfg.max_candidates_per_column));
        std::sort(local.begin(), local.end(),
                  [](const Candidate& x, const Candidate& y) {
                      return x.lag_index < y.lag_index;
                  });
        if (local.empty()) continue;
        col_ranges.emplace_back(cands.size(), cands.size() + local.size());
        col_of_range.push_back(c);
        cands.insert(cands.end(), local.begin(), local.end());
    }
    if (cands.empty()) return std::nullopt;

    // Penalized max-score chain: lag non-decreasing, growth capped by
    // v_max; each point contributes score - penalty, so weak peaks
    // cannot pad the ends of the track.
    const double max_rate = 2.0 * cfg.v_max_m_s / cfg.sound_speed_m_s; // s/s
    const std::size_t lookback = 40;
    std::vector<double> best(cands.size());
    std::vector<std::int64_t> prev(cands.size(), -1);
    for (std::size_t i = 0; i < cands.size(); ++i)
        best[i] = cands[i].score - cfg.path_point_penalty;

    for (std::size_t ri = 1; ri < col_ranges.size(); ++ri) {
        const std::size_t col_i = col_of_range[ri];
        for (std::size_t rj = ri >= lookback ? ri - lookback : 0; rj < ri;
             ++rj) {
            const std::size_t col_j = col_of_range[rj];
            const double dt = static_cast<double>(col_i - col_j) * map.hop_s;
            const double max_dlag = max_rate * dt;
            for (std::size_t i = col_ranges[ri].first;
                 i < col_ranges[ri].second; ++i) {
                for (std::size_t j = col_ranges[rj].first;
                     j < col_ranges[rj].second; ++j) {
                    const double dlag = map.lag_axis_s[cands[i].lag_index] -
                                        map.lag_axis_s[cands[j].lag_index];
                    if (dlag < 0.0 || dlag > max_dlag) continue;
                    const double v = best[j] + cands[i].score -
                                     cfg.path_point_penalty;
                    if (v > best[i]) {
                        best[i] = v;
                        prev[i] = static_cast<std::int64_t>(j);
                    }
                }
            }
        }
    }

    std::size_t end_idx = static_cast<std::size_t>(
        std::max_element(best.begin(), best.end()) - best.begin());
    std::vector<std::size_t> chain;
    double raw_sum = 0.0;
    for (std::int64_t i = static_cast<std::int64_t>(end_idx); i >= 0;
         i = prev[static_cast<std::size_t>(i)]) {
        chain.push_back(static_cast<std::size_t>(i));
        raw_sum += cands[static_cast<std::size_t>(i)].score;
    }
    std::reverse(chain.begin(), chain.end());

    if (chain.size() < 2 || best[end_idx] <= 0.0) return std::nullopt;
    const double mean_score = raw_sum / static_cast<double>(chain.size());
    if (mean_score < cfg.min_mean_score) return std::nullopt;

    Trajectory traj;
    traj.baseline_lag_s = tau0;
    traj.mean_score = mean_score;
    const double length_m = seg.length_km * 1000.0;
    for (std::size_t idx : chain) {
        const Candidate& cand = cands[idx];
        TrajectoryPoint p;
        p.t_us = map.time_bins_us[cand.column];
        p.lag_s = map.lag_axis_s[cand.lag_index];
        p.score = cand.score;
        p.position_m = lag_to_position_m(p.lag_s, tau0, cfg, length_m);
        traj.points.push_back(p);
    }

    // Least-squares slope over the middle 80% of the path; the clamped
    // flat stretches at either end would bias a full fit.
    std::size_t lo = traj.points.size() / 10;
    std::size_t hi = traj.points.size() - lo;
    if (hi - lo < 2) {
        lo = 0;
        hi = traj.points.size();
    }
    double st = 0, sx = 0, stt = 0, stx = 0;
    const double t0 = us_to_seconds(traj.points[lo].t_us);
    const auto n = static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        const double t = us_to_seconds(traj.points[i].t_us) - t0;
        const double x = traj.points[i].position_m;
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
    }
    const double denom = n * stt - st * st;
    traj.velocity_m_s = denom > 0 ? (n * stx - st * sx) / denom : 0.0;

    const TrajectoryPoint& last = traj.points.back();
    if (last.position_m >= length_m - 1.0) {
        traj.eta_us = last.t_us;
    } else if (traj.velocity_m_s > 1e-6) {
        traj.eta_us =
            last.t_us + seconds_to_us((length_m - last.position_m) /
                                      traj.velocity_m_s);
    }
    return traj;
}

void write_correlation_map_csv(const CorrelationMap& map,
                               const std::string& path) {
    std::string out = "time_us";
    for (double lag : map.lag_axis_s) {
        out += ',';
        out += format_double(lag);
    }
    out += '\n';
    for (std::size_t c = 0; c < map.values.size(); ++c) {
        out += std::to_string(map.time_bins_us[c]);
        for (double v : map.values[c]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::string out = "time_us,lag_s,position_m,score\n";
    for (const auto& p : traj.points) {
        out += std::to_string(p.t_us);
        out += ',';
        out += format_double(p.lag_s);
        out += ',';
        out += format_double(p.position_m);
        out += ',';
        out += format_double(p.score);
        out += '\n';
    }
    write_file_atomic(path, out);
}

} // namespace pigflow
