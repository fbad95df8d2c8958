#include "stages.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>

#include "pigflow/error.hpp"
#include "pigflow/svg.hpp"
#include "pigflow/textio.hpp"

namespace pigflow::cli {

namespace {

namespace fs = std::filesystem;

std::string path_in(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void require_artifact(const RunConfig& cfg, const std::string& name,
                      const std::string& producer) {
    if (!fs::exists(path_in(cfg, name)))
        throw Error("missing " + path_in(cfg, name) + "; run `pigflow " +
                    producer + "` first");
}

double days_since(Timestamp t, Timestamp t0) {
    return us_to_seconds(t - t0) / 86400.0;
}

/// Raw static channel after outlier removal, on the analysis grid.
struct CleanStation {
    std::string id;
    UniformSeries series;
};

UniformSeries load_clean_station(const RunConfig& cfg, const std::string& id) {
    const std::string name = id + "_static_clean.csv";
    require_artifact(cfg, name, "cleanse");
    return load_uniform_csv(path_in(cfg, name));
}

svg::LineSeries series_line(const UniformSeries& u, Timestamp t0,
                            const std::string& label,
                            const std::string& color) {
    svg::LineSeries line;
    line.label = label;
    line.color = color;
    line.x.reserve(u.size());
    line.y.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        line.x.push_back(days_since(u.bin_start(i), t0));
        line.y.push_back(u.values[i]);
    }
    return line;
}

} // namespace

void run_synth(const RunConfig& cfg, const StageOptions& opt) {
    fs::create_directories(cfg.out_dir);
    ScenarioConfig scenario = cfg.scenario;
    if (opt.seed) scenario.seed = *opt.seed;

    const StaticScenario stat = generate_static_scenario(scenario);
    for (const auto& ps : stat.stations)
        write_csv_series(ps, path_in(cfg, ps.station + "_static.csv"));
    write_ground_truth(stat.truth, cfg.out_dir);
    write_scenario_meta(scenario, path_in(cfg, "scenario.meta"));

    // Dynamic channels for the configured campaign and segment.
    const std::string seg_name =
        opt.segment ? *opt.segment : cfg.acoustic_segment;
    if (!scenario.pig_events.empty()) {
        if (cfg.acoustic_event_index >= scenario.pig_events.size())
            throw Error("synth: acoustic_event_index out of range");
        const SegmentMeta seg = cfg.segment(seg_name);
        const AcousticScenario ac = generate_acoustic_scenario(
            scenario, seg, scenario.pig_events[cfg.acoustic_event_index]);
        write_csv_series(ac.upstream,
                         path_in(cfg, ac.upstream.station + "_dynamic.csv"));
        write_csv_series(ac.downstream,
                         path_in(cfg, ac.downstream.station + "_dynamic.csv"));
        std::string out = "time_us,position_m\n";
        for (const auto& [t, x] : ac.truth.trajectory)
            out += std::to_string(t) + "," + format_double(x) + "\n";
        write_file_atomic(path_in(cfg, "ground_truth_trajectory.csv"), out);
    }
    std::cout << "synth: wrote " << stat.stations.size()
              << " static series to " << cfg.out_dir << "\n";
}

void run_cleanse(const RunConfig& cfg, const StageOptions& opt) {
    fs::create_directories(cfg.out_dir);
    std::string summary =
        "station,samples,removed_outliers,off_windows,regulation_windows,"
        "transport_windows\n";
    for (const auto& st : cfg.stations) {
        const std::string raw_name = st.id + "_static.csv";
        require_artifact(cfg, raw_name, "synth");
        const PressureSeries raw = load_csv_series(
            path_in(cfg, raw_name), st.id, ChannelKind::StaticBar);
        const OutlierResult polished = remove_outliers(raw, cfg.outliers);
        UniformSeries grid =
            resample_uniform(polished.series, cfg.grid_step_s, Reducer::Mean);
        if (opt.from && opt.to)
            grid = slice_interval(grid, *opt.from, *opt.to);

        const auto rows = state_features(grid, cfg.state_window_s);
        const GmmModel model = fit_gmm(rows, 3);
        const StateSegmentation seg =
            classify_states(model, rows, cfg.state_window_s);
        const UniformSeries clean =
            mask_series(grid, seg, StateLabel::Transport);

        write_uniform_csv(clean, path_in(cfg, st.id + "_static_clean.csv"),
                          "value_bar");
        write_states_csv(seg, path_in(cfg, "states_" + st.id + ".csv"));

        std::size_t off = 0, reg = 0, transport = 0;
        for (const auto& [t, label] : seg.windows) {
            if (label == StateLabel::Off) ++off;
            else if (label == StateLabel::Regulation) ++reg;
            else ++transport;
        }
        summary += st.id + "," + std::to_string(raw.size()) + "," +
                   std::to_string(polished.removed) + "," +
                   std::to_string(off) + "," + std::to_string(reg) + "," +
                   std::to_string(transport) + "\n";

        svg::LineChart chart;
        chart.title = "Station " + st.id + ": static pressure before/after cleansing";
        chart.x_label = "days since series start";
        chart.y_label = "pressure (bar)";
        UniformSeries raw_grid =
            resample_uniform(raw, cfg.grid_step_s, Reducer::Mean);
        chart.series.push_back(
            series_line(raw_grid, raw_grid.start_us, "raw", "#bbbbbb"));
        chart.series.push_back(
            series_line(clean, raw_grid.start_us, "transport only", "#1f77b4"));
        write_file_atomic(path_in(cfg, "cleanse_" + st.id + ".svg"),
                          svg::render_line_chart(chart));
    }
    write_file_atomic(path_in(cfg, "cleanse_summary.csv"), summary);
    std::cout << "cleanse: labeled " << cfg.stations.size() << " stations\n";
}

void run_headloss(const RunConfig& cfg, const StageOptions& opt) {
    (void)opt;
    fs::create_directories(cfg.out_dir);
    const StationMeta& reference = cfg.stations.front();
    std::map<std::string, UniformSeries> compensated;
    for (const auto& st : cfg.stations) {
        UniformSeries clean = load_clean_station(cfg, st.id);
        const CompensationEntry comp =
            make_compensation(cfg.fluid, st, reference);
        compensated[st.id] = compensate(clean, comp.dp_pa);
    }
    for (const SegmentMeta& seg : cfg.segments()) {
        const HeadLossSeries h = build_head_loss(
            compensated.at(seg.upstream), compensated.at(seg.downstream), seg);
        write_head_loss_csv(h, path_in(cfg, "headloss_" + seg.name() + ".csv"));

        svg::LineChart chart;
        chart.title = "Head loss " + seg.name();
        chart.x_label = "days since series start";
        chart.y_label = "head loss (bar/km)";
        chart.series.push_back(series_line(h.short_term, h.short_term.start_us,
                                           "short-term", "#bbbbbb"));
        chart.series.push_back(series_line(h.long_term, h.short_term.start_us,
                                           "1-week trailing mean", "#d62728"));
        write_file_atomic(path_in(cfg, "headloss_" + seg.name() + ".svg"),
                          svg::render_line_chart(chart));
    }
    std::cout << "headloss: wrote " << cfg.segments().size() << " segments\n";
}

void run_track(const RunConfig& cfg, const StageOptions& opt) {
    fs::create_directories(cfg.out_dir);
    const std::string seg_name =
        opt.segment ? *opt.segment : cfg.acoustic_segment;
    const SegmentMeta seg = cfg.segment(seg_name);

    const auto load_dynamic = [&](const std::string& id) {
        const std::string name = id + "_dynamic.csv";
        require_artifact(cfg, name, "synth");
        const PressureSeries raw = load_csv_series(path_in(cfg, name), id,
                                                   ChannelKind::DynamicKpa);
        const OutlierResult polished = remove_outliers(raw, cfg.outliers);
        UniformSeries u = resample_uniform(
            polished.series, 1.0 / cfg.scenario.dynamic_rate_hz,
            Reducer::Mean);
        if (opt.from && opt.to) u = slice_interval(u, *opt.from, *opt.to);
        return u;
    };
    const UniformSeries up = load_dynamic(seg.upstream);
    const UniformSeries down = load_dynamic(seg.downstream);

    // Correlating (downstream, upstream) puts the direct pump arrival
    // at negative lag and makes the echo ridge climb as the pig moves.
    const CorrelationMap map = build_correlation_map(down, up, cfg.tracker);
    write_correlation_map_csv(map,
                              path_in(cfg, "xcorr_map_" + seg_name + ".csv"));

    const std::optional<Trajectory> traj =
        extract_trajectory(map, cfg.tracker, seg);

    std::string info;
    svg::HeatMap heat;
    heat.title = "Cross-correlation map " + seg_name;
    heat.x_label = "hours since map start";
    heat.y_label = "lag (s)";
    heat.y = map.lag_axis_s;
    const Timestamp t0 = map.time_bins_us.empty() ? 0 : map.time_bins_us.front();
    for (Timestamp t : map.time_bins_us)
        heat.x.push_back(us_to_seconds(t - t0) / 3600.0);
    heat.cells = map.values;

    if (traj) {
        write_trajectory_csv(*traj,
                             path_in(cfg, "trajectory_" + seg_name + ".csv"));
        for (const auto& p : traj->points) {
            heat.overlay_x.push_back(us_to_seconds(p.t_us - t0) / 3600.0);
            heat.overlay_y.push_back(p.lag_s);
        }
        info = "detected = true\n";
        info += "points = " + std::to_string(traj->points.size()) + "\n";
        info += "baseline_lag_s = " + format_double(traj->baseline_lag_s) + "\n";
        info += "velocity_m_s = " + format_double(traj->velocity_m_s) + "\n";
        info += "mean_score = " + format_double(traj->mean_score) + "\n";
        if (traj->eta_us)
            info += "eta = " + format_iso8601(*traj->eta_us) + "\n";
    } else {
        write_file_atomic(path_in(cfg, "trajectory_" + seg_name + ".csv"),
                          "time_us,lag_s,position_m,score\n");
        info = "detected = false\n";
    }
    write_file_atomic(path_in(cfg, "track_" + seg_name + ".txt"), info);
    write_file_atomic(path_in(cfg, "track_" + seg_name + ".svg"),
                      svg::render_heat_map(heat));
    std::cout << "track " << seg_name << ": "
              << (traj ? "pig detected, velocity " +
                             format_double(traj->velocity_m_s) + " m/s"
                       : "no pig detected")
              << "\n";
}

namespace {

Dataset build_segment_dataset(const RunConfig& cfg, const SegmentMeta& seg,
                              MappingConfig& mapping_out) {
    const std::string name = "headloss_" + seg.name() + ".csv";
    require_artifact(cfg, name, "headloss");
    const HeadLossSeries h = load_head_loss_csv(path_in(cfg, name), seg);
    // The indicator target is defined per segment, anchored on the
    // training date span so train and test share one definition.
    mapping_out = fit_mapping(h.long_term, cfg.train_from, cfg.train_to,
                              cfg.mapping);
    const UniformSeries y = build_pig_indicator(h.long_term, mapping_out);
    const auto features = rolling_features(h.short_term);
    return assemble_dataset(features, y);
}

} // namespace

void run_train(const RunConfig& cfg, const StageOptions& opt) {
    (void)opt;
    fs::create_directories(cfg.out_dir);
    Dataset train_ds;
    bool have_train = false;
    for (const SegmentMeta& seg : cfg.segments()) {
        MappingConfig mapping;
        const Dataset ds = build_segment_dataset(cfg, seg, mapping);
        write_mapping_csv(mapping,
                          path_in(cfg, "mapping_" + seg.name() + ".csv"));
        write_dataset_csv(ds, path_in(cfg, "dataset_" + seg.name() + ".csv"));
        if (seg.name() == cfg.train_segment) {
            train_ds = slice_dataset(ds, cfg.train_from, cfg.train_to);
            have_train = true;
        }
    }
    if (!have_train)
        throw Error("train: training segment " + cfg.train_segment +
                    " is not one of the configured segments");
    if (train_ds.empty())
        throw Error("train: no rows in the training span on " +
                    cfg.train_segment);
    const DecisionTreeModel model = fit_tree(train_ds, cfg.training);
    write_model(model, path_in(cfg, "model.txt"));

    std::size_t leaves = 0;
    for (const auto& n : model.nodes)
        if (n.is_leaf()) ++leaves;
    std::cout << "train: " << train_ds.size() << " rows on "
              << cfg.train_segment << ", tree with " << leaves << " leaves\n";
}

void run_predict(const RunConfig& cfg, const StageOptions& opt) {
    (void)opt;
    fs::create_directories(cfg.out_dir);
    require_artifact(cfg, "model.txt", "train");
    const DecisionTreeModel model = load_model(path_in(cfg, "model.txt"));

    std::map<std::string, Dataset> datasets;
    for (const SegmentMeta& seg : cfg.segments()) {
        const std::string name = "dataset_" + seg.name() + ".csv";
        require_artifact(cfg, name, "train");
        datasets[seg.name()] = load_dataset_csv(path_in(cfg, name));
    }

    ProtocolConfig pcfg;
    pcfg.train_segment = cfg.train_segment;
    pcfg.train_from = cfg.train_from;
    pcfg.train_to = cfg.train_to;
    pcfg.train = cfg.training;
    // The protocol retrains deterministically on the same rows the
    // train stage used; assert the stored model matches.
    const ProtocolResult proto = run_protocol(datasets, pcfg);
    if (serialize_model(proto.model) != serialize_model(model))
        throw Error("predict: model.txt does not match the configured "
                    "training span (re-run `pigflow train`)");

    std::string eval_csv =
        "segment,span_from_us,span_to_us,n_rows,rms_error,accuracy_pct\n";
    for (const EvalReport& rep : proto.reports) {
        eval_csv += rep.segment + "," + std::to_string(rep.from_us) + "," +
                    std::to_string(rep.to_us) + "," +
                    std::to_string(rep.n_rows) + "," +
                    format_double(rep.rms_error) + "," +
                    format_double(rep.accuracy_pct) + "\n";
        std::cout << "predict " << rep.segment << ": rms "
                  << format_double(rep.rms_error) << ", accuracy "
                  << format_double(rep.accuracy_pct) << "% over "
                  << rep.n_rows << " rows\n";
    }
    write_file_atomic(path_in(cfg, "evaluation.csv"), eval_csv);

    for (const auto& [name, ds] : datasets) {
        const std::vector<double> y_hat = predict(model, ds);
        std::string out = "t_us,target,prediction\n";
        for (std::size_t i = 0; i < ds.size(); ++i)
            out += std::to_string(ds.t_us[i]) + "," + format_double(ds.y[i]) +
                   "," + format_double(y_hat[i]) + "\n";
        write_file_atomic(path_in(cfg, "prediction_" + name + ".csv"), out);

        svg::LineChart chart;
        chart.title = "Pig indicator " + name + ": target vs prediction";
        chart.x_label = "days since series start";
        chart.y_label = "pigging probability";
        svg::LineSeries truth{"target", "#222222", {}, {}};
        svg::LineSeries pred{"prediction", "#d62728", {}, {}};
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const double day = days_since(ds.t_us[i], ds.t_us.front());
            truth.x.push_back(day);
            truth.y.push_back(ds.y[i]);
            pred.x.push_back(day);
            pred.y.push_back(y_hat[i]);
        }
        chart.series.push_back(std::move(truth));
        chart.series.push_back(std::move(pred));
        write_file_atomic(path_in(cfg, "predict_" + name + ".svg"),
                          svg::render_line_chart(chart));
    }
}

void run_report(const RunConfig& cfg, const StageOptions& opt) {
    const double threshold =
        opt.threshold ? *opt.threshold : cfg.report_threshold;
    struct Row {
        std::string segment;
        Timestamp t_us;
        double probability;
    };
    std::vector<Row> rows;
    for (const SegmentMeta& seg : cfg.segments()) {
        const std::string name = "prediction_" + seg.name() + ".csv";
        require_artifact(cfg, name, "predict");
        const std::string text = read_file(path_in(cfg, name));
        // last data line carries the latest prediction
        std::size_t end = text.size();
        while (end > 0 && text[end - 1] == '\n') --end;
        const std::size_t start = text.rfind('\n', end - 1);
        const auto fields = split_csv(
            std::string_view(text).substr(start + 1, end - start - 1));
        if (fields.size() != 3 || fields[0] == "t_us")
            throw Error("report: no predictions in " + name);
        bool ok1 = false, ok2 = false;
        rows.push_back({seg.name(), parse_int64(fields[0], ok1),
                        parse_double(fields[2], ok2)});
        if (!ok1 || !ok2) throw Error("report: malformed " + name);
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.probability != b.probability) return a.probability > b.probability;
        return a.segment < b.segment;
    });

    std::string csv = "segment,latest_time,latest_probability,flagged\n";
    std::size_t flagged = 0;
    std::cout << "pigging necessity by segment (threshold "
              << format_double(threshold) << "):\n";
    for (const Row& row : rows) {
        const bool flag = row.probability >= threshold;
        flagged += flag ? 1 : 0;
        csv += row.segment + "," + format_iso8601(row.t_us) + "," +
               format_double(row.probability) + "," + (flag ? "1" : "0") + "\n";
        std::cout << "  " << row.segment << "  p = "
                  << format_double(row.probability)
                  << (flag ? "  << PIG CAMPAIGN ADVISED" : "") << "\n";
    }
    write_file_atomic(path_in(cfg, "report.csv"), csv);
    std::cout << (flagged ? std::to_string(flagged) : std::string("no"))
              << " segment(s) above threshold\n";
}

} // namespace pigflow::cli
