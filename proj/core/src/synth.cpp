#include "pigflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"
#include "pigflow/time.hpp"

namespace pigflow {

std::vector<StationMeta> default_stations() {
    return {{"A", 0.0, 179.0}, {"B", 59.307, 359.0}, {"C", 100.486, 558.0}};
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.stations = default_stations();
    cfg.start_us = make_timestamp(2013, 6, 1);
    const auto day = [&](double d) {
        return cfg.start_us + seconds_to_us(d * 86400.0);
    };
    cfg.pig_events = {
        {day(100), 0.35, 1.163, 0.0},
        {day(220), 0.40, 1.25, 0.0},
        {day(340), 0.35, 1.05, 0.0},
        {day(460), 0.40, 1.163, 0.0},
    };
    return cfg;
}

namespace {

void validate(const ScenarioConfig& cfg) {
    if (cfg.stations.size() < 2)
        throw Error("scenario: need at least two stations");
    for (std::size_t i = 1; i < cfg.stations.size(); ++i)
        if (cfg.stations[i].chainage_km <= cfg.stations[i - 1].chainage_km)
            throw Error("scenario: stations must be ordered by chainage");
    if (cfg.stations.front().chainage_km != 0.0)
        throw Error("scenario: first station must sit at chainage 0");
    for (const auto& ev : cfg.pig_events) {
        if (ev.removal_fraction < 0.0 || ev.removal_fraction > 1.0)
            throw Error("scenario: removal fraction must be in [0,1]");
        if (!(ev.velocity_m_s > 0.0))
            throw Error("scenario: pig velocity must be positive");
    }
    if (cfg.fouling_rate_bar_per_km_per_day < 0.0)
        throw Error("scenario: fouling rate must be >= 0");
    if (!(cfg.duration_s > 0.0) || !(cfg.static_step_s > 0.0) ||
        !(cfg.state_window_s >= cfg.static_step_s))
        throw Error("scenario: invalid time configuration");
}

/// Noise-free head loss: baseline plus linear fouling, partially reset
/// at each pig event.
class FoulingCurve {
public:
    FoulingCurve(const ScenarioConfig& cfg) : baseline_(
        cfg.baseline_head_loss_bar_per_km),
        rate_per_us_(cfg.fouling_rate_bar_per_km_per_day / 86400.0 / 1e6) {
        std::vector<PigEvent> events = cfg.pig_events;
        std::sort(events.begin(), events.end(),
                  [](const PigEvent& a, const PigEvent& b) {
                      return a.t_us < b.t_us;
                  });
        Timestamp t = cfg.start_us;
        double h = baseline_;
        anchors_.emplace_back(t, h);
        for (const auto& ev : events) {
            if (ev.t_us < t) continue;
            const double at_event =
                h + rate_per_us_ * static_cast<double>(ev.t_us - t);
            h = baseline_ + (at_event - baseline_) * (1.0 - ev.removal_fraction);
            t = ev.t_us;
            anchors_.emplace_back(t, h);
        }
    }

    double at(Timestamp t) const {
        auto it = std::upper_bound(
            anchors_.begin(), anchors_.end(), t,
            [](Timestamp v, const auto& a) { return v < a.first; });
        if (it == anchors_.begin()) return baseline_;
        --it;
        return it->second + rate_per_us_ * static_cast<double>(t - it->first);
    }

private:
    double baseline_;
    double rate_per_us_;
    std::vector<std::pair<Timestamp, double>> anchors_;
};

std::vector<StateLabel> build_regimes(const ScenarioConfig& cfg,
                                      std::size_t n_windows,
                                      std::mt19937_64& rng) {
    std::vector<StateLabel> regimes(n_windows, StateLabel::Transport);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double win_s = cfg.state_window_s;
    std::size_t i = 0;
    StateLabel current = StateLabel::Transport;
    while (i < n_windows) {
        double mean_s = current == StateLabel::Transport ? cfg.dwell.transport_s
                        : current == StateLabel::Regulation
                            ? cfg.dwell.regulation_s
                            : cfg.dwell.off_s;
        std::exponential_distribution<double> dwell(1.0 / std::max(mean_s, win_s));
        const auto len = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(dwell(rng) / win_s)));
        for (std::size_t j = i; j < std::min(i + len, n_windows); ++j)
            regimes[j] = current;
        i += len;
        switch (current) {
        case StateLabel::Transport: current = StateLabel::Regulation; break;
        case StateLabel::Regulation:
            current = coin(rng) < 0.5 ? StateLabel::Off : StateLabel::Transport;
            break;
        case StateLabel::Off: current = StateLabel::Regulation; break;
        }
    }

    // Campaigns run under flow regulation from shortly before the
    // launch until the pig has cleared the line.
    const double line_km = cfg.stations.back().chainage_km;
    for (const auto& ev : cfg.pig_events) {
        const double transit_s = line_km * 1000.0 / ev.velocity_m_s;
        const Timestamp from = ev.t_us - seconds_to_us(cfg.maintenance_lead_s);
        const Timestamp to =
            ev.t_us + seconds_to_us(transit_s + cfg.maintenance_tail_s);
        const std::int64_t win_us = seconds_to_us(win_s);
        std::int64_t first = floor_div(from - cfg.start_us, win_us);
        std::int64_t last = floor_div(to - cfg.start_us - 1, win_us);
        first = std::max<std::int64_t>(first, 0);
        last = std::min<std::int64_t>(last,
                                      static_cast<std::int64_t>(n_windows) - 1);
        for (std::int64_t w = first; w <= last; ++w)
            regimes[static_cast<std::size_t>(w)] = StateLabel::Regulation;
    }
    return regimes;
}

} // namespace

StaticScenario generate_static_scenario(const ScenarioConfig& cfg) {
    validate(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::int64_t step_us = seconds_to_us(cfg.static_step_s);
    const std::int64_t window_us = seconds_to_us(cfg.state_window_s);
    const auto n_bins = static_cast<std::size_t>(
        seconds_to_us(cfg.duration_s) / step_us);
    const auto n_windows = static_cast<std::size_t>(
        seconds_to_us(cfg.duration_s) / window_us);

    StaticScenario out;
    out.truth.state_window_us = window_us;

    const std::vector<StateLabel> regimes = build_regimes(cfg, n_windows, rng);
    out.truth.labels.reserve(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w)
        out.truth.labels.emplace_back(
            cfg.start_us + static_cast<std::int64_t>(w) * window_us,
            regimes[w]);

    const FoulingCurve fouling(cfg);

    // Shared AR(1) flow-regulation transient, one innovation per bin.
    const double phi = std::exp(-cfg.static_step_s / cfg.regulation_tau_s);
    const double innov_std =
        cfg.regulation_std_bar * std::sqrt(1.0 - phi * phi);

    const StationMeta& ref = cfg.stations.front();
    const double tail_chainage = cfg.stations.back().chainage_km;
    std::vector<double> dp_bar(cfg.stations.size());
    for (std::size_t s = 0; s < cfg.stations.size(); ++s)
        dp_bar[s] = hydrostatic_dp_pa(
                        cfg.fluid, cfg.stations[s].altitude_m - ref.altitude_m) /
                    1e5;

    out.stations.resize(cfg.stations.size());
    for (std::size_t s = 0; s < cfg.stations.size(); ++s) {
        auto& ps = out.stations[s];
        ps.station = cfg.stations[s].id;
        ps.channel = ChannelKind::StaticBar;
        ps.nominal_rate_hz = 1.0 / cfg.static_step_s;
        ps.timestamps_us.reserve(n_bins);
        ps.values.reserve(n_bins);
    }

    UniformSeries truth_h;
    truth_h.start_us = cfg.start_us;
    truth_h.step_us = step_us;
    truth_h.values.reserve(n_bins);

    double ar = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        const Timestamp t =
            cfg.start_us + static_cast<std::int64_t>(i) * step_us;
        const std::size_t w = std::min(
            n_windows - 1, static_cast<std::size_t>((t - cfg.start_us) /
                                                    window_us));
        const StateLabel regime = regimes[w];
        const double h = fouling.at(t);
        truth_h.values.push_back(h);

        ar = phi * ar + innov_std * gauss(rng);
        const double regulation_level = cfg.regulation_mean_bar + ar;

        for (std::size_t s = 0; s < cfg.stations.size(); ++s) {
            const double noise = gauss(rng);
            double v = 0.0;
            switch (regime) {
            case StateLabel::Transport:
                v = cfg.delivery_pressure_bar +
                    h * (tail_chainage - cfg.stations[s].chainage_km) +
                    dp_bar[s] + noise * cfg.noise.static_transport_bar;
                break;
            case StateLabel::Regulation:
                v = regulation_level + noise * cfg.noise.static_transport_bar;
                break;
            case StateLabel::Off:
                v = cfg.off_pressure_bar + noise * cfg.noise.static_off_bar;
                break;
            }
            out.stations[s].timestamps_us.push_back(t);
            out.stations[s].values.push_back(v);
        }
    }

    for (const SegmentMeta& seg : make_segments(cfg.stations))
        out.truth.head_loss[seg.name()] = truth_h;

    // Deliberate sensor glitches, strictly outside the outlier policy.
    if (cfg.injected_outliers_per_station > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, n_bins - 1);
        for (std::size_t s = 0; s < cfg.stations.size(); ++s) {
            std::set<std::size_t> bins;
            while (bins.size() <
                   static_cast<std::size_t>(cfg.injected_outliers_per_station))
                bins.insert(pick(rng));
            auto& ts_list = out.truth.outlier_ts[cfg.stations[s].id];
            std::size_t j = 0;
            for (std::size_t bin : bins) {
                out.stations[s].values[bin] = (j++ % 2 == 0) ? 95.0 : 0.25;
                ts_list.push_back(out.stations[s].timestamps_us[bin]);
            }
        }
    }
    return out;
}

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kButterworthQ = 0.707106781186547524;

// RBJ biquad, direct form 1.
struct Biquad {
    double b0, b1, b2, a1, a2;
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

    static Biquad low_pass(double fc, double rate_hz) {
        const double w = 2.0 * kPi * fc / rate_hz;
        const double alpha = std::sin(w) / (2.0 * kButterworthQ);
        const double c = std::cos(w);
        const double a0 = 1.0 + alpha;
        return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
                -2.0 * c / a0, (1.0 - alpha) / a0};
    }
    static Biquad high_pass(double fc, double rate_hz) {
        const double w = 2.0 * kPi * fc / rate_hz;
        const double alpha = std::sin(w) / (2.0 * kButterworthQ);
        const double c = std::cos(w);
        const double a0 = 1.0 + alpha;
        return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0,
                -2.0 * c / a0, (1.0 - alpha) / a0};
    }

    double step(double x) {
        const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = x;
        y2 = y1;
        y1 = y;
        return y;
    }
};

} // namespace

AcousticScenario generate_acoustic_scenario(const ScenarioConfig& cfg,
                                            const SegmentMeta& seg,
                                            const PigEvent& event) {
    if (!(seg.length_km > 0)) throw Error("acoustic: invalid segment");
    if (!(cfg.dynamic_rate_hz > 0)) throw Error("acoustic: invalid rate");
    const double c = cfg.sound_speed_m_s;
    const double length_m = seg.length_km * 1000.0;
    const double direct_delay_s = length_m / c;

    const std::int64_t step_us = seconds_to_us(1.0 / cfg.dynamic_rate_hz);
    const double step_s = us_to_seconds(step_us);
    // A parked or slow reflector would make the transit span unbounded;
    // the scenario duration caps it.
    const double transit_s = std::min(
        (length_m - std::clamp(event.start_position_m, 0.0, length_m)) /
            event.velocity_m_s,
        cfg.duration_s);
    const Timestamp t0 = event.t_us - seconds_to_us(cfg.acoustic_lead_s);
    const Timestamp t1 =
        event.t_us + seconds_to_us(transit_s + cfg.acoustic_tail_s);
    const auto n = static_cast<std::size_t>((t1 - t0) / step_us);
    if (n == 0) throw Error("acoustic: empty scenario span");

    // Source history long enough to serve the largest echo delay, with
    // a little filter warm-up in front.
    const double max_delay_s = 2.0 * length_m / c;
    const auto pre = static_cast<std::size_t>(
        std::ceil((max_delay_s + 120.0) / step_s));

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> source(n + pre);
    Biquad hp = Biquad::high_pass(cfg.band_low_hz, cfg.dynamic_rate_hz);
    Biquad lp = Biquad::low_pass(cfg.band_high_hz, cfg.dynamic_rate_hz);
    for (double& v : source)
        v = lp.step(hp.step(gauss(rng))) * cfg.source_std_kpa;

    // source[pre + i] is the emission at sample i; negative offsets
    // reach into the warm-up region.
    const auto source_at = [&](double sample_pos) {
        const double p = sample_pos + static_cast<double>(pre);
        if (p < 0.0) return 0.0;
        const auto i0 = static_cast<std::size_t>(p);
        if (i0 + 1 >= source.size()) return source.back();
        const double frac = p - static_cast<double>(i0);
        return source[i0] * (1.0 - frac) + source[i0 + 1] * frac;
    };

    AcousticScenario out;
    out.truth.direct_delay_s = direct_delay_s;
    for (PressureSeries* ps : {&out.upstream, &out.downstream}) {
        ps->channel = ChannelKind::DynamicKpa;
        ps->nominal_rate_hz = cfg.dynamic_rate_hz;
        ps->timestamps_us.reserve(n);
        ps->values.reserve(n);
    }
    out.upstream.station = seg.upstream;
    out.downstream.station = seg.downstream;

    const double direct_delay_samples = direct_delay_s / step_s;
    for (std::size_t i = 0; i < n; ++i) {
        const Timestamp t = t0 + static_cast<std::int64_t>(i) * step_us;
        const double t_rel_s = us_to_seconds(t - event.t_us);

        double up = source_at(static_cast<double>(i));
        if (t_rel_s >= 0.0 && cfg.echo_amplitude != 0.0) {
            const double x = std::clamp(
                event.start_position_m + event.velocity_m_s * t_rel_s, 0.0,
                length_m);
            const double echo_delay_samples = 2.0 * x / c / step_s;
            up += cfg.echo_amplitude *
                  source_at(static_cast<double>(i) - echo_delay_samples);
        }
        up += gauss(rng) * cfg.noise.dynamic_kpa;

        const double down =
            cfg.transmission *
                source_at(static_cast<double>(i) - direct_delay_samples) +
            gauss(rng) * cfg.noise.dynamic_kpa;

        out.upstream.timestamps_us.push_back(t);
        out.upstream.values.push_back(up);
        out.downstream.timestamps_us.push_back(t);
        out.downstream.values.push_back(down);
    }

    for (Timestamp t = event.t_us; t <= t1; t += 60 * kMicrosPerSecond) {
        const double x = std::clamp(
            event.start_position_m +
                event.velocity_m_s * us_to_seconds(t - event.t_us),
            0.0, length_m);
        out.truth.trajectory.emplace_back(t, x);
    }
    return out;
}

void write_ground_truth(const GroundTruth& truth, const std::string& dir) {
    if (!truth.labels.empty()) {
        std::string out = "window_start_us,label\n";
        for (const auto& [t, label] : truth.labels)
            out += std::to_string(t) + "," + to_string(label) + "\n";
        write_file_atomic(dir + "/ground_truth_labels.csv", out);
    }
    for (const auto& [name, series] : truth.head_loss)
        write_uniform_csv(series, dir + "/ground_truth_headloss_" + name +
                                      ".csv",
                          "true_head_loss_bar_per_km");
    if (!truth.trajectory.empty()) {
        std::string out = "time_us,position_m\n";
        for (const auto& [t, x] : truth.trajectory)
            out += std::to_string(t) + "," + format_double(x) + "\n";
        write_file_atomic(dir + "/ground_truth_trajectory.csv", out);
    }
    if (!truth.outlier_ts.empty()) {
        std::string out = "station,timestamp_us\n";
        for (const auto& [station, ts] : truth.outlier_ts)
            for (Timestamp t : ts)
                out += station + "," + std::to_string(t) + "\n";
        write_file_atomic(dir + "/ground_truth_outliers.csv", out);
    }
}

void write_scenario_meta(const ScenarioConfig& cfg, const std::string& path) {
    std::string out;
    out += "rng = mt19937_64\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "start = " + format_iso8601(cfg.start_us) + "\n";
    out += "duration_s = " + format_double(cfg.duration_s) + "\n";
    for (const auto& st : cfg.stations)
        out += "station = " + st.id + " " + format_double(st.chainage_km) +
               " " + format_double(st.altitude_m) + "\n";
    out += "density_kg_m3 = " + format_double(cfg.fluid.density_kg_m3) + "\n";
    out += "delivery_pressure_bar = " +
           format_double(cfg.delivery_pressure_bar) + "\n";
    out += "baseline_head_loss_bar_per_km = " +
           format_double(cfg.baseline_head_loss_bar_per_km) + "\n";
    out += "fouling_rate_bar_per_km_per_day = " +
           format_double(cfg.fouling_rate_bar_per_km_per_day) + "\n";
    for (const auto& ev : cfg.pig_events)
        out += "pig_event = " + std::to_string(ev.t_us) + " " +
               format_double(ev.removal_fraction) + " " +
               format_double(ev.velocity_m_s) + "\n";
    out += "dwell_s = " + format_double(cfg.dwell.transport_s) + " " +
           format_double(cfg.dwell.regulation_s) + " " +
           format_double(cfg.dwell.off_s) + "\n";
    out += "noise = " + format_double(cfg.noise.static_transport_bar) + " " +
           format_double(cfg.noise.static_off_bar) + " " +
           format_double(cfg.noise.dynamic_kpa) + "\n";
    out += "static_step_s = " + format_double(cfg.static_step_s) + "\n";
    out += "dynamic_rate_hz = " + format_double(cfg.dynamic_rate_hz) + "\n";
    out += "sound_speed_m_s = " + format_double(cfg.sound_speed_m_s) + "\n";
    out += "injected_outliers_per_station = " +
           std::to_string(cfg.injected_outliers_per_station) + "\n";
    write_file_atomic(path, out);
}

} // namespace pigflow
