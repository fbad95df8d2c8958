#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pigflow/cleanse.hpp"
#include "pigflow/hydraulics.hpp"
#include "pigflow/series.hpp"

namespace pigflow {

/// One cleaning run. The pig enters at the first station and travels
/// the whole line at velocity_m_s; removal_fraction of the accumulated
/// excess head loss disappears when it completes.
struct PigEvent {
    Timestamp t_us = 0;
    double removal_fraction = 0.9;
    double velocity_m_s = 1.163;
    double start_position_m = 0.0; // nonzero models a parked reflector
};

/// Mean dwell times of the regime process. Dwells are drawn
/// exponentially and rounded to whole state windows, so regime switches
/// line up with classification windows.
struct RegimeDwell {
    double transport_s = 30.0 * 3600;
    double regulation_s = 4.0 * 3600;
    double off_s = 10.0 * 3600;
};

struct NoiseLevels {
    double static_transport_bar = 0.3;
    double static_off_bar = 0.05;
    double dynamic_kpa = 1.0;
};

struct ScenarioConfig {
    std::vector<StationMeta> stations;
    FluidProps fluid;
    double delivery_pressure_bar = 36.0;
    double baseline_head_loss_bar_per_km = 0.08;
    double fouling_rate_bar_per_km_per_day = 0.0009;
    std::vector<PigEvent> pig_events;
    RegimeDwell dwell;
    NoiseLevels noise;
    double regulation_mean_bar = 30.0;
    double regulation_std_bar = 3.0;
    double regulation_tau_s = 1800.0;
    double off_pressure_bar = 1.0;
    double state_window_s = 600.0;
    double static_step_s = 60.0;
    double dynamic_rate_hz = 2.0;
    double sound_speed_m_s = 1186.14;
    Timestamp start_us = 0; // filled by default_scenario()
    double duration_s = 540.0 * 86400;
    // Operations around a campaign: flow regulation from lead before
    // the launch until tail after the pig arrives.
    double maintenance_lead_s = 6.0 * 3600;
    double maintenance_tail_s = 12.0 * 3600;
    int injected_outliers_per_station = 12;
    // Acoustic scenario.
    double source_std_kpa = 20.0;
    double echo_amplitude = 0.8;
    double transmission = 0.6;
    double band_low_hz = 0.05;
    double band_high_hz = 0.6;
    double acoustic_lead_s = 600.0;
    double acoustic_tail_s = 900.0;
    std::uint64_t seed = 20130601;
};

/// Table-default three-station line (A at the pumping terminal).
std::vector<StationMeta> default_stations();

/// 540-day desk-scale scenario: default stations, four pig events,
/// default noise.
ScenarioConfig default_scenario();

/// Everything the acceptance oracle needs, emitted alongside the series.
struct GroundTruth {
    std::int64_t state_window_us = 0;
    std::vector<std::pair<Timestamp, StateLabel>> labels; // global regime
    std::map<std::string, UniformSeries> head_loss; // noise-free, bar/km
    std::map<std::string, std::vector<Timestamp>> outlier_ts; // per station
    std::vector<std::pair<Timestamp, double>> trajectory;     // t -> x (m)
    double direct_delay_s = 0.0;                              // D/c
};

struct StaticScenario {
    std::vector<PressureSeries> stations; // static channel, one per station
    GroundTruth truth;
};

/// Static-pressure scenario: downstream station held near the delivery
/// pressure, upstream pressures derived from the true head loss plus
/// hydrostatic offsets, regimes from a seeded Markov chain. Identical
/// seed and config give byte-identical series.
StaticScenario generate_static_scenario(const ScenarioConfig& cfg);

struct AcousticScenario {
    PressureSeries upstream;   // source + moving-reflector echo
    PressureSeries downstream; // attenuated, delayed source
    GroundTruth truth;
};

/// Dynamic-pressure scenario for one segment and one pig run:
/// band-limited noise source at the upstream station, direct path
/// delayed D/c at the downstream one, echo delayed 2x(t)/c upstream.
AcousticScenario generate_acoustic_scenario(const ScenarioConfig& cfg,
                                            const SegmentMeta& seg,
                                            const PigEvent& event);

/// ground_truth_*.csv files plus scenario.meta (key = value).
void write_ground_truth(const GroundTruth& truth, const std::string& dir);
void write_scenario_meta(const ScenarioConfig& cfg, const std::string& path);

} // namespace pigflow
