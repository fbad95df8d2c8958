#include "config.hpp"

#include <algorithm>
#include <sstream>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"
#include "pigflow/time.hpp"

namespace pigflow::cli {

StationMeta RunConfig::station(const std::string& id) const {
    for (const auto& st : stations)
        if (st.id == id) return st;
    throw Error("unknown station '" + id + "'");
}

SegmentMeta RunConfig::segment(const std::string& name) const {
    const std::size_t dash = name.find('-');
    if (dash == std::string::npos)
        throw Error("segment name must be <UP>-<DOWN>, got '" + name + "'");
    return make_segment(station(name.substr(0, dash)),
                        station(name.substr(dash + 1)));
}

RunConfig default_run_config() {
    RunConfig cfg;
    cfg.train_from = cfg.scenario.start_us;
    cfg.train_to = cfg.scenario.start_us + seconds_to_us(365.0 * 86400);
    return cfg;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

double to_double(const std::string& s, const std::string& key) {
    bool ok = false;
    const double v = parse_double(s, ok);
    if (!ok) throw Error("config: bad number for " + key + ": '" + s + "'");
    return v;
}

std::int64_t to_int(const std::string& s, const std::string& key) {
    bool ok = false;
    const std::int64_t v = parse_int64(s, ok);
    if (!ok) throw Error("config: bad integer for " + key + ": '" + s + "'");
    return v;
}

struct Parser {
    RunConfig cfg = default_run_config();
    bool stations_reset = false;
    bool events_reset = false;

    void apply(const std::string& section, const std::string& key,
               const std::string& value) {
        const auto vs = words(value);
        const auto need = [&](std::size_t n) {
            if (vs.size() != n)
                throw Error("config: " + section + "." + key + " expects " +
                            std::to_string(n) + " value(s)");
        };
        if (section == "stations") {
            if (!stations_reset) {
                cfg.stations.clear();
                stations_reset = true;
            }
            need(2);
            cfg.stations.push_back({key, to_double(vs[0], key),
                                    to_double(vs[1], key)});
            return;
        }
        const std::string full = section + "." + key;
        if (section == "fluid") {
            need(1);
            if (key == "density_kg_m3")
                cfg.fluid.density_kg_m3 = to_double(vs[0], full);
            else if (key == "gravity_m_s2")
                cfg.fluid.gravity_m_s2 = to_double(vs[0], full);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "cleanse") {
            need(1);
            if (key == "static_min_bar")
                cfg.outliers.static_min_bar = to_double(vs[0], full);
            else if (key == "static_max_bar")
                cfg.outliers.static_max_bar = to_double(vs[0], full);
            else if (key == "dynamic_min_kpa")
                cfg.outliers.dynamic_min_kpa = to_double(vs[0], full);
            else if (key == "dynamic_max_kpa")
                cfg.outliers.dynamic_max_kpa = to_double(vs[0], full);
            else if (key == "state_window_s")
                cfg.state_window_s = to_double(vs[0], full);
            else if (key == "grid_step_s")
                cfg.grid_step_s = to_double(vs[0], full);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "tracker") {
            need(1);
            if (key == "window_s")
                cfg.tracker.window_s = to_double(vs[0], full);
            else if (key == "hop_s")
                cfg.tracker.hop_s = to_double(vs[0], full);
            else if (key == "max_lag_s")
                cfg.tracker.max_lag_s = to_double(vs[0], full);
            else if (key == "sound_speed_m_s")
                cfg.tracker.sound_speed_m_s = to_double(vs[0], full);
            else if (key == "baseline_exclusion_s")
                cfg.tracker.baseline_exclusion_s = to_double(vs[0], full);
            else if (key == "min_mean_score")
                cfg.tracker.min_mean_score = to_double(vs[0], full);
            else if (key == "v_max_m_s")
                cfg.tracker.v_max_m_s = to_double(vs[0], full);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "mapping") {
            need(1);
            if (key == "lo_percentile")
                cfg.mapping.lo_percentile = to_double(vs[0], full);
            else if (key == "hi_percentile")
                cfg.mapping.hi_percentile = to_double(vs[0], full);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "training") {
            need(1);
            if (key == "max_depth")
                cfg.training.max_depth = static_cast<int>(to_int(vs[0], full));
            else if (key == "min_samples_leaf")
                cfg.training.min_samples_leaf =
                    static_cast<int>(to_int(vs[0], full));
            else if (key == "min_mse_decrease")
                cfg.training.min_mse_decrease = to_double(vs[0], full);
            else if (key == "train_segment")
                cfg.train_segment = vs[0];
            else if (key == "train_from")
                cfg.train_from = parse_iso8601(vs[0]);
            else if (key == "train_to")
                cfg.train_to = parse_iso8601(vs[0]);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "report") {
            need(1);
            if (key == "threshold")
                cfg.report_threshold = to_double(vs[0], full);
            else
                throw Error("config: unknown key " + full);
        } else if (section == "synth") {
            auto& sc = cfg.scenario;
            if (key == "pig_event") {
                need(3);
                if (!events_reset) {
                    sc.pig_events.clear();
                    events_reset = true;
                }
                sc.pig_events.push_back({parse_iso8601(vs[0]),
                                         to_double(vs[1], full),
                                         to_double(vs[2], full), 0.0});
                return;
            }
            if (key == "dwell_hours") {
                need(3);
                sc.dwell.transport_s = to_double(vs[0], full) * 3600;
                sc.dwell.regulation_s = to_double(vs[1], full) * 3600;
                sc.dwell.off_s = to_double(vs[2], full) * 3600;
                return;
            }
            if (key == "noise") {
                need(3);
                sc.noise.static_transport_bar = to_double(vs[0], full);
                sc.noise.static_off_bar = to_double(vs[1], full);
                sc.noise.dynamic_kpa = to_double(vs[2], full);
                return;
            }
            if (key == "regulation") {
                need(3);
                sc.regulation_mean_bar = to_double(vs[0], full);
                sc.regulation_std_bar = to_double(vs[1], full);
                sc.regulation_tau_s = to_double(vs[2], full);
                return;
            }
            if (key == "band_hz") {
                need(2);
                sc.band_low_hz = to_double(vs[0], full);
                sc.band_high_hz = to_double(vs[1], full);
                return;
            }
            need(1);
            if (key == "seed")
                sc.seed = static_cast<std::uint64_t>(to_int(vs[0], full));
            else if (key == "start")
                sc.start_us = parse_iso8601(vs[0]);
            else if (key == "duration_days")
                sc.duration_s = to_double(vs[0], full) * 86400.0;
            else if (key == "baseline_head_loss_bar_per_km")
                sc.baseline_head_loss_bar_per_km = to_double(vs[0], full);
            else if (key == "fouling_rate_bar_per_km_per_day")
                sc.fouling_rate_bar_per_km_per_day = to_double(vs[0], full);
            else if (key == "delivery_pressure_bar")
                sc.delivery_pressure_bar = to_double(vs[0], full);
            else if (key == "off_pressure_bar")
                sc.off_pressure_bar = to_double(vs[0], full);
            else if (key == "static_step_s")
                sc.static_step_s = to_double(vs[0], full);
            else if (key == "dynamic_rate_hz")
                sc.dynamic_rate_hz = to_double(vs[0], full);
            else if (key == "sound_speed_m_s")
                sc.sound_speed_m_s = to_double(vs[0], full);
            else if (key == "maintenance_lead_hours")
                sc.maintenance_lead_s = to_double(vs[0], full) * 3600;
            else if (key == "maintenance_tail_hours")
                sc.maintenance_tail_s = to_double(vs[0], full) * 3600;
            else if (key == "injected_outliers_per_station")
                sc.injected_outliers_per_station =
                    static_cast<int>(to_int(vs[0], full));
            else if (key == "source_std_kpa")
                sc.source_std_kpa = to_double(vs[0], full);
            else if (key == "echo_amplitude")
                sc.echo_amplitude = to_double(vs[0], full);
            else if (key == "transmission")
                sc.transmission = to_double(vs[0], full);
            else if (key == "acoustic_lead_s")
                sc.acoustic_lead_s = to_double(vs[0], full);
            else if (key == "acoustic_tail_s")
                sc.acoustic_tail_s = to_double(vs[0], full);
            else if (key == "acoustic_segment")
                cfg.acoustic_segment = vs[0];
            else if (key == "acoustic_event_index")
                cfg.acoustic_event_index =
                    static_cast<std::size_t>(to_int(vs[0], full));
            else
                throw Error("config: unknown key " + full);
        } else if (section == "io") {
            need(1);
            if (key == "out_dir")
                cfg.out_dir = vs[0];
            else
                throw Error("config: unknown key " + full);
        } else {
            throw Error("config: unknown section [" + section + "]");
        }
    }
};

} // namespace

RunConfig load_run_config(const std::string& path) {
    const std::string text = read_file(path);
    Parser parser;
    std::string section;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("config: malformed section header", line_no);
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: expected key = value", line_no);
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw ParseError("config: empty key", line_no);
        try {
            parser.apply(section, key, value);
        } catch (const Error& e) {
            throw ParseError(std::string(e.what()), line_no);
        }
    }
    // Keep the scenario coherent with the analysis settings.
    parser.cfg.scenario.stations = parser.cfg.stations;
    parser.cfg.scenario.fluid = parser.cfg.fluid;
    parser.cfg.scenario.state_window_s = parser.cfg.state_window_s;
    return parser.cfg;
}

std::string dump_run_config(const RunConfig& cfg) {
    std::string out;
    out += "[stations]\n";
    for (const auto& st : cfg.stations)
        out += st.id + " = " + format_double(st.chainage_km) + " " +
               format_double(st.altitude_m) + "\n";
    out += "\n[fluid]\n";
    out += "density_kg_m3 = " + format_double(cfg.fluid.density_kg_m3) + "\n";
    out += "gravity_m_s2 = " + format_double(cfg.fluid.gravity_m_s2) + "\n";
    out += "\n[cleanse]\n";
    out += "static_min_bar = " + format_double(cfg.outliers.static_min_bar) +
           "\n";
    out += "static_max_bar = " + format_double(cfg.outliers.static_max_bar) +
           "\n";
    out += "dynamic_min_kpa = " + format_double(cfg.outliers.dynamic_min_kpa) +
           "\n";
    out += "dynamic_max_kpa = " + format_double(cfg.outliers.dynamic_max_kpa) +
           "\n";
    out += "state_window_s = " + format_double(cfg.state_window_s) + "\n";
    out += "grid_step_s = " + format_double(cfg.grid_step_s) + "\n";
    out += "\n[tracker]\n";
    out += "window_s = " + format_double(cfg.tracker.window_s) + "\n";
    out += "hop_s = " + format_double(cfg.tracker.hop_s) + "\n";
    out += "max_lag_s = " + format_double(cfg.tracker.max_lag_s) + "\n";
    out += "sound_speed_m_s = " + format_double(cfg.tracker.sound_speed_m_s) +
           "\n";
    out += "baseline_exclusion_s = " +
           format_double(cfg.tracker.baseline_exclusion_s) + "\n";
    out += "min_mean_score = " + format_double(cfg.tracker.min_mean_score) +
           "\n";
    out += "v_max_m_s = " + format_double(cfg.tracker.v_max_m_s) + "\n";
    out += "\n[mapping]\n";
    out += "lo_percentile = " + format_double(cfg.mapping.lo_percentile) + "\n";
    out += "hi_percentile = " + format_double(cfg.mapping.hi_percentile) + "\n";
    out += "\n[training]\n";
    out += "max_depth = " + std::to_string(cfg.training.max_depth) + "\n";
    out += "min_samples_leaf = " +
           std::to_string(cfg.training.min_samples_leaf) + "\n";
    out += "min_mse_decrease = " +
           format_double(cfg.training.min_mse_decrease) + "\n";
    out += "train_segment = " + cfg.train_segment + "\n";
    out += "train_from = " + format_iso8601(cfg.train_from) + "\n";
    out += "train_to = " + format_iso8601(cfg.train_to) + "\n";
    out += "\n[report]\n";
    out += "threshold = " + format_double(cfg.report_threshold) + "\n";
    const auto& sc = cfg.scenario;
    out += "\n[synth]\n";
    out += "seed = " + std::to_string(sc.seed) + "\n";
    out += "start = " + format_iso8601(sc.start_us) + "\n";
    out += "duration_days = " + format_double(sc.duration_s / 86400.0) + "\n";
    out += "baseline_head_loss_bar_per_km = " +
           format_double(sc.baseline_head_loss_bar_per_km) + "\n";
    out += "fouling_rate_bar_per_km_per_day = " +
           format_double(sc.fouling_rate_bar_per_km_per_day) + "\n";
    out += "delivery_pressure_bar = " +
           format_double(sc.delivery_pressure_bar) + "\n";
    for (const auto& ev : sc.pig_events)
        out += "pig_event = " + format_iso8601(ev.t_us) + " " +
               format_double(ev.removal_fraction) + " " +
               format_double(ev.velocity_m_s) + "\n";
    out += "dwell_hours = " + format_double(sc.dwell.transport_s / 3600) +
           " " + format_double(sc.dwell.regulation_s / 3600) + " " +
           format_double(sc.dwell.off_s / 3600) + "\n";
    out += "noise = " + format_double(sc.noise.static_transport_bar) + " " +
           format_double(sc.noise.static_off_bar) + " " +
           format_double(sc.noise.dynamic_kpa) + "\n";
    out += "regulation = " + format_double(sc.regulation_mean_bar) + " " +
           format_double(sc.regulation_std_bar) + " " +
           format_double(sc.regulation_tau_s) + "\n";
    out += "off_pressure_bar = " + format_double(sc.off_pressure_bar) + "\n";
    out += "static_step_s = " + format_double(sc.static_step_s) + "\n";
    out += "dynamic_rate_hz = " + format_double(sc.dynamic_rate_hz) + "\n";
    out += "sound_speed_m_s = " + format_double(sc.sound_speed_m_s) + "\n";
    out += "maintenance_lead_hours = " +
           format_double(sc.maintenance_lead_s / 3600) + "\n";
    out += "maintenance_tail_hours = " +
           format_double(sc.maintenance_tail_s / 3600) + "\n";
    out += "injected_outliers_per_station = " +
           std::to_string(sc.injected_outliers_per_station) + "\n";
    out += "source_std_kpa = " + format_double(sc.source_std_kpa) + "\n";
    out += "echo_amplitude = " + format_double(sc.echo_amplitude) + "\n";
    out += "transmission = " + format_double(sc.transmission) + "\n";
    out += "band_hz = " + format_double(sc.band_low_hz) + " " +
           format_double(sc.band_high_hz) + "\n";
    out += "acoustic_lead_s = " + format_double(sc.acoustic_lead_s) + "\n";
    out += "acoustic_tail_s = " + format_double(sc.acoustic_tail_s) + "\n";
    out += "acoustic_segment = " + cfg.acoustic_segment + "\n";
    out += "acoustic_event_index = " +
           std::to_string(cfg.acoustic_event_index) + "\n";
    out += "\n[io]\n";
    out += "out_dir = " + cfg.out_dir + "\n";
    return out;
}

} // namespace pigflow::cli
