#include "pigflow/cleanse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

std::string to_string(StateLabel l) {
    switch (l) {
    case StateLabel::Off: return "OFF";
    case StateLabel::Regulation: return "REGULATION";
    case StateLabel::Transport: return "TRANSPORT";
    }
    return "?";
}

StateLabel state_label_from_string(const std::string& s) {
    if (s == "OFF") return StateLabel::Off;
    if (s == "REGULATION") return StateLabel::Regulation;
    if (s == "TRANSPORT") return StateLabel::Transport;
    throw Error("unknown state label: '" + s + "'");
}

OutlierResult remove_outliers(const PressureSeries& s,
                              const OutlierPolicy& p) {
    const auto [lo, hi] = p.bounds_for(s.channel);
    if (!(lo < hi)) throw Error("outlier policy bounds inverted");
    OutlierResult res;
    res.series.station = s.station;
    res.series.channel = s.channel;
    res.series.nominal_rate_hz = s.nominal_rate_hz;
    res.series.timestamps_us.reserve(s.size());
    res.series.values.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s.values[i];
        if (v > lo && v < hi) {
            res.series.timestamps_us.push_back(s.timestamps_us[i]);
            res.series.values.push_back(v);
        } else {
            ++res.removed;
        }
    }
    return res;
}

std::vector<StateFeatureRow> state_features(const UniformSeries& u,
                                            double window_s) {
    if (u.step_us <= 0) return {};
    if (window_s < u.step_s())
        throw Error("state window shorter than the series step");
    const auto win_bins =
        static_cast<std::size_t>(seconds_to_us(window_s) / u.step_us);
    std::vector<StateFeatureRow> rows;
    for (std::size_t base = 0; base + win_bins <= u.size(); base += win_bins) {
        double sum = 0.0, sum_sq = 0.0;
        bool gap = false;
        for (std::size_t i = base; i < base + win_bins; ++i) {
            if (is_missing(u.values[i])) {
                gap = true;
                break;
            }
            sum += u.values[i];
            sum_sq += u.values[i] * u.values[i];
        }
        if (gap) continue;
        const double n = static_cast<double>(win_bins);
        const double mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - mean * mean);
        rows.push_back({u.bin_start(base), mean, std::sqrt(var)});
    }
    return rows;
}

namespace {

constexpr double kVarianceFloor = 1e-6; // in standardized units
constexpr double kLog2Pi = 1.8378770664093453;

struct Standardized {
    std::vector<std::array<double, 2>> x;
    std::array<double, 2> center;
    std::array<double, 2> scale;
};

Standardized standardize(const std::vector<StateFeatureRow>& rows) {
    Standardized s;
    s.x.resize(rows.size());
    for (int d = 0; d < 2; ++d) {
        double sum = 0.0;
        for (const auto& r : rows) sum += d == 0 ? r.mean_bar : r.std_bar;
        const double mean = sum / static_cast<double>(rows.size());
        double ss = 0.0;
        for (const auto& r : rows) {
            const double v = (d == 0 ? r.mean_bar : r.std_bar) - mean;
            ss += v * v;
        }
        double sd = std::sqrt(ss / static_cast<double>(rows.size()));
        if (sd < 1e-12) sd = 1.0; // constant dimension: pass through
        s.center[d] = mean;
        s.scale[d] = sd;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.x[i][0] = (rows[i].mean_bar - s.center[0]) / s.scale[0];
        s.x[i][1] = (rows[i].std_bar - s.center[1]) / s.scale[1];
    }
    return s;
}

double sq_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double d0 = a[0] - b[0], d1 = a[1] - b[1];
    return d0 * d0 + d1 * d1;
}

// Farthest-point seeding: the row nearest the centroid, then rows
// maximizing the distance to every chosen seed.
std::vector<std::array<double, 2>>
seed_farthest(const std::vector<std::array<double, 2>>& x, int k) {
    std::array<double, 2> centroid{0, 0};
    for (const auto& p : x) {
        centroid[0] += p[0];
        centroid[1] += p[1];
    }
    centroid[0] /= static_cast<double>(x.size());
    centroid[1] /= static_cast<double>(x.size());

    std::vector<std::array<double, 2>> seeds;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = sq_dist(x[i], centroid);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    seeds.push_back(x[best]);
    while (static_cast<int>(seeds.size()) < k) {
        best = 0;
        best_d = -1.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = std::numeric_limits<double>::max();
            for (const auto& s : seeds) d = std::min(d, sq_dist(x[i], s));
            if (d > best_d) {
                best_d = d;
                best = i;
            }
        }
        seeds.push_back(x[best]);
    }
    return seeds;
}

// Seeds at the (2i+1)/2k quantile rows of the first (mean-pressure)
// dimension; for k=3 these are the 1/6, 3/6 and 5/6 quantiles.
std::vector<std::array<double, 2>>
seed_quantiles(const std::vector<std::array<double, 2>>& x, int k) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a][0] < x[b][0];
    });
    std::vector<std::array<double, 2>> seeds;
    for (int i = 0; i < k; ++i) {
        const auto pos = static_cast<std::size_t>(
            (2 * i + 1) * (x.size() - 1) / (2 * k));
        seeds.push_back(x[order[pos]]);
    }
    return seeds;
}

// Regime-informed seeding for k=3: lowest mean (off), highest std
// (flow regulation), and a 60th-percentile-mean row (transport bulk).
std::vector<std::array<double, 2>>
seed_regimes(const std::vector<std::array<double, 2>>& x) {
    std::size_t lo_mean = 0, hi_std = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i][0] < x[lo_mean][0]) lo_mean = i;
        if (x[i][1] > x[hi_std][1]) hi_std = i;
    }
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a][0] < x[b][0];
    });
    const std::size_t bulk = order[(x.size() - 1) * 6 / 10];
    return {x[lo_mean], x[hi_std], x[bulk]};
}

struct InitialParams {
    std::vector<double> weights;
    std::vector<std::array<double, 2>> means;
    std::vector<std::array<double, 2>> variances;
};

// A few Lloyd iterations turn raw seed rows into cluster centers with
// per-cluster spreads, which EM then only has to polish.
InitialParams lloyd_refine(const std::vector<std::array<double, 2>>& x,
                           std::vector<std::array<double, 2>> means) {
    const int k = static_cast<int>(means.size());
    std::vector<int> assign(x.size(), 0);
    for (int iter = 0; iter < 10; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            int best = 0;
            double best_d = sq_dist(x[i], means[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(x[i], means[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        std::vector<std::array<double, 2>> sums(k, {0, 0});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            sums[assign[i]][0] += x[i][0];
            sums[assign[i]][1] += x[i][1];
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0)
                means[c] = {sums[c][0] / static_cast<double>(counts[c]),
                            sums[c][1] / static_cast<double>(counts[c])};
        if (!changed) break;
    }

    InitialParams init;
    init.means = means;
    init.weights.assign(k, 0.0);
    init.variances.assign(k, {1.0, 1.0});
    std::vector<std::array<double, 2>> ss(k, {0, 0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const int c = assign[i];
        const double d0 = x[i][0] - means[c][0];
        const double d1 = x[i][1] - means[c][1];
        ss[c][0] += d0 * d0;
        ss[c][1] += d1 * d1;
        ++counts[c];
    }
    const auto n = static_cast<double>(x.size());
    for (int c = 0; c < k; ++c) {
        init.weights[c] = std::max(counts[c] / n, 1e-3);
        if (counts[c] > 0)
            init.variances[c] = {
                std::max(kVarianceFloor,
                         ss[c][0] / static_cast<double>(counts[c])),
                std::max(kVarianceFloor,
                         ss[c][1] / static_cast<double>(counts[c]))};
    }
    double wsum = 0.0;
    for (double w : init.weights) wsum += w;
    for (double& w : init.weights) w /= wsum;
    return init;
}

double log_gauss_diag(const std::array<double, 2>& x,
                      const std::array<double, 2>& m,
                      const std::array<double, 2>& v) {
    const double d0 = x[0] - m[0], d1 = x[1] - m[1];
    return -kLog2Pi - 0.5 * (std::log(v[0]) + std::log(v[1])) -
           0.5 * (d0 * d0 / v[0] + d1 * d1 / v[1]);
}

struct EmFit {
    InitialParams p;
    bool converged = false;
    std::vector<double> ll_history;
};

EmFit run_em(const std::vector<std::array<double, 2>>& x, InitialParams init,
             int max_iters) {
    const int k = static_cast<int>(init.means.size());
    const std::size_t n = x.size();
    EmFit fit;
    fit.p = std::move(init);

    std::vector<double> log_w(k), resp(static_cast<std::size_t>(k));
    std::vector<std::vector<double>> resp_all(k, std::vector<double>(n));
    std::vector<std::array<double, 2>> mean_acc(k), var_acc(k);
    std::vector<double> weight_acc(k);

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int c = 0; c < k; ++c)
            log_w[c] = std::log(std::max(fit.p.weights[c], 1e-300));
        std::fill(weight_acc.begin(), weight_acc.end(), 0.0);
        for (int c = 0; c < k; ++c) mean_acc[c] = {0, 0};

        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                resp[c] = log_w[c] + log_gauss_diag(x[i], fit.p.means[c],
                                                    fit.p.variances[c]);
                mx = std::max(mx, resp[c]);
            }
            double denom = 0.0;
            for (int c = 0; c < k; ++c) denom += std::exp(resp[c] - mx);
            ll += mx + std::log(denom);
            for (int c = 0; c < k; ++c) {
                const double r = std::exp(resp[c] - mx) / denom;
                resp_all[c][i] = r;
                weight_acc[c] += r;
                mean_acc[c][0] += r * x[i][0];
                mean_acc[c][1] += r * x[i][1];
            }
        }
        fit.ll_history.push_back(ll);
        if (iter > 0 && ll < prev_ll - 1e-8)
            throw Error("fit_gmm: EM log-likelihood decreased");

        for (int c = 0; c < k; ++c) {
            if (weight_acc[c] < 1e-12) continue; // starved component
            fit.p.means[c][0] = mean_acc[c][0] / weight_acc[c];
            fit.p.means[c][1] = mean_acc[c][1] / weight_acc[c];
        }
        for (int c = 0; c < k; ++c) var_acc[c] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                const double r = resp_all[c][i];
                const double d0 = x[i][0] - fit.p.means[c][0];
                const double d1 = x[i][1] - fit.p.means[c][1];
                var_acc[c][0] += r * d0 * d0;
                var_acc[c][1] += r * d1 * d1;
            }
        }
        for (int c = 0; c < k; ++c) {
            if (weight_acc[c] < 1e-12) continue;
            fit.p.variances[c][0] =
                std::max(kVarianceFloor, var_acc[c][0] / weight_acc[c]);
            fit.p.variances[c][1] =
                std::max(kVarianceFloor, var_acc[c][1] / weight_acc[c]);
            fit.p.weights[c] = weight_acc[c] / static_cast<double>(n);
        }
        double wsum = 0.0;
        for (int c = 0; c < k; ++c) wsum += fit.p.weights[c];
        for (int c = 0; c < k; ++c) fit.p.weights[c] /= wsum;

        const double rel =
            std::abs(ll - prev_ll) / std::max(1.0, std::abs(prev_ll));
        if (iter > 0 && rel < 1e-6) {
            fit.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return fit;
}

} // namespace

GmmModel fit_gmm(const std::vector<StateFeatureRow>& rows, int k) {
    if (k < 1) throw Error("fit_gmm: k must be >= 1");
    const std::size_t n = rows.size();
    if (n < static_cast<std::size_t>(10 * k))
        throw Error("fit_gmm: need at least " + std::to_string(10 * k) +
                    " rows, got " + std::to_string(n));
    bool all_same = true;
    for (std::size_t i = 1; i < n && all_same; ++i)
        all_same = rows[i].mean_bar == rows[0].mean_bar &&
                   rows[i].std_bar == rows[0].std_bar;
    if (all_same) throw Error("fit_gmm: degenerate data (all rows identical)");

    const Standardized st = standardize(rows);

    // Deterministic multi-start, no RNG anywhere: several seeding rules,
    // each refined by Lloyd iterations, EM from each, best final
    // likelihood wins. Single-rule seeding is brittle when cluster
    // proportions are far from uniform.
    std::vector<std::vector<std::array<double, 2>>> seedings;
    seedings.push_back(seed_farthest(st.x, k));
    seedings.push_back(seed_quantiles(st.x, k));
    if (k == 3) seedings.push_back(seed_regimes(st.x));

    EmFit best;
    bool have_best = false;
    for (const auto& seeds : seedings) {
        EmFit fit = run_em(st.x, lloyd_refine(st.x, seeds), 200);
        if (!have_best ||
            fit.ll_history.back() > best.ll_history.back() + 1e-12) {
            best = std::move(fit);
            have_best = true;
        }
    }

    GmmModel model;
    model.k = k;
    model.feat_center = st.center;
    model.feat_scale = st.scale;
    model.weights = best.p.weights;
    model.means = best.p.means;
    model.variances = best.p.variances;
    model.converged = best.converged;
    model.ll_history = best.ll_history;
    model.log_likelihood = best.ll_history.back();

    // Report parameters in original feature units.
    for (int c = 0; c < k; ++c) {
        for (int d = 0; d < 2; ++d) {
            model.means[c][d] =
                model.means[c][d] * st.scale[d] + st.center[d];
            model.variances[c][d] *= st.scale[d] * st.scale[d];
        }
    }
    return model;
}

StateSegmentation classify_states(const GmmModel& model,
                                  const std::vector<StateFeatureRow>& rows,
                                  double window_s) {
    if (model.k != 3)
        throw Error("classify_states: model must have k = 3 components");

    // Component -> label mapping, independent of component order.
    int off = 0;
    for (int c = 1; c < 3; ++c)
        if (model.means[c][0] < model.means[off][0]) off = c;
    int rest[2], r = 0;
    for (int c = 0; c < 3; ++c)
        if (c != off) rest[r++] = c;
    const int regulation =
        model.means[rest[0]][1] >= model.means[rest[1]][1] ? rest[0] : rest[1];

    StateSegmentation seg;
    seg.window_us = seconds_to_us(window_s);
    seg.windows.reserve(rows.size());
    for (const auto& row : rows) {
        const std::array<double, 2> x{row.mean_bar, row.std_bar};
        double best = -std::numeric_limits<double>::infinity();
        int best_c = 0;
        for (int c = 0; c < 3; ++c) {
            const double s = std::log(std::max(model.weights[c], 1e-300)) +
                             log_gauss_diag(x, model.means[c],
                                            model.variances[c]);
            if (s > best) {
                best = s;
                best_c = c;
            }
        }
        StateLabel label = best_c == off          ? StateLabel::Off
                           : best_c == regulation ? StateLabel::Regulation
                                                  : StateLabel::Transport;
        seg.windows.emplace_back(row.window_start_us, label);
    }
    return seg;
}

UniformSeries mask_series(const UniformSeries& u, const StateSegmentation& seg,
                          StateLabel keep) {
    UniformSeries out = u;
    if (u.step_us <= 0 || seg.window_us <= 0) return out;
    const auto n = static_cast<std::int64_t>(u.size());
    for (const auto& [wstart, label] : seg.windows) {
        if (label == keep) continue;
        std::int64_t first =
            floor_div(wstart - u.start_us + u.step_us - 1, u.step_us);
        std::int64_t last =
            floor_div(wstart + seg.window_us - u.start_us - 1, u.step_us);
        first = std::max<std::int64_t>(first, 0);
        last = std::min(last, n - 1);
        for (std::int64_t i = first; i <= last; ++i)
            out.values[static_cast<std::size_t>(i)] = kMissing;
    }
    return out;
}

void write_states_csv(const StateSegmentation& seg, const std::string& path) {
    std::string out = "window_start_us,label\n";
    for (const auto& [t, label] : seg.windows) {
        out += std::to_string(t);
        out += ',';
        out += to_string(label);
        out += '\n';
    }
    write_file_atomic(path, out);
}

StateSegmentation load_states_csv(const std::string& path, double window_s) {
    const std::string text = read_file(path);
    StateSegmentation seg;
    seg.window_us = seconds_to_us(window_s);
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
        const Timestamp t = parse_int64(fields[0], ok);
        if (!ok) throw ParseError("malformed row in " + path, line_no);
        seg.windows.emplace_back(
            t, state_label_from_string(std::string(fields[1])));
    }
    return seg;
}

} // namespace pigflow
