#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pigflow/cleanse.hpp"
#include "pigflow/features.hpp"
#include "pigflow/hydraulics.hpp"
#include "pigflow/pigtrack.hpp"
#include "pigflow/regressor.hpp"
#include "pigflow/synth.hpp"

namespace pigflow::cli {

/// Everything a batch run needs, loaded from a flat `key = value` file
/// with [section] headers. Defaults reproduce the desk-scale scenario.
struct RunConfig {
    std::vector<StationMeta> stations = default_stations();
    FluidProps fluid;
    OutlierPolicy outliers;
    double state_window_s = 600.0;
    double grid_step_s = 60.0;
    TrackerConfig tracker;
    MappingConfig mapping;
    TrainConfig training;
    std::string train_segment = "A-C";
    Timestamp train_from = 0;
    Timestamp train_to = 0;
    double report_threshold = 0.8;
    ScenarioConfig scenario = default_scenario();
    std::string acoustic_segment = "A-B";
    std::size_t acoustic_event_index = 0;
    std::string out_dir = "pigflow-run";

    StationMeta station(const std::string& id) const;
    SegmentMeta segment(const std::string& name) const;
    std::vector<SegmentMeta> segments() const { return make_segments(stations); }
};

RunConfig default_run_config();

/// Parses the config file; unknown keys are an error so typos surface.
RunConfig load_run_config(const std::string& path);

/// Writes the full effective configuration (the format load accepts).
std::string dump_run_config(const RunConfig& cfg);

} // namespace pigflow::cli
