#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pigflow/series.hpp"

namespace pigflow {

struct TrackerConfig {
    double window_s = 60.0;
    double hop_s = 30.0;
    double max_lag_s = 120.0;
    // Derived from the direct-arrival lag of ~50 s over the 59.307 km
    // A-B span; fluid batches vary, so keep it configurable.
    double sound_speed_m_s = 1186.14;
    double baseline_exclusion_s = 2.0;
    double v_max_m_s = 5.0;       // caps per-hop lag growth in the path search
    double min_mean_score = 0.3;  // detection threshold on the best path
    double min_peak_score = 0.05; // candidate floor after ridge removal
    // Per-point cost in the path objective sum(score - penalty): points
    // below it must earn their place, which keeps stray noise peaks off
    // the ends of a track.
    double path_point_penalty = 0.3;
    int max_candidates_per_column = 8;
};

/// One row of normalized cross-correlation over lags
/// -max_lag..+max_lag samples. Positive lag means b lags a.
struct XcorrResult {
    std::vector<double> r;
    int max_lag_samples = 0;
    bool zero_variance = false;

    double at_lag(int lag) const {
        return r[static_cast<std::size_t>(lag + max_lag_samples)];
    }
};

/// Mean-removed cross-correlation of two equal-length windows,
/// normalized by the product of their RMS amplitudes so |R| <= 1.
/// Windows must be longer than 2*max_lag_samples. A zero-variance
/// window yields an all-zero row with the flag set.
XcorrResult windowed_xcorr(std::span<const double> a,
                           std::span<const double> b, int max_lag_samples);

/// time x lag grid of normalized cross-correlation between two dynamic
/// channels. Column timestamps are window centers. Columns touching
/// MISSING data are zero-filled and flagged.
struct CorrelationMap {
    std::vector<Timestamp> time_bins_us;
    std::vector<double> lag_axis_s;
    std::vector<std::vector<double>> values; // [column][lag]
    std::vector<std::uint8_t> flagged;       // per column
    double sample_step_s = 0.0;
    double hop_s = 0.0;

    bool empty() const { return time_bins_us.empty(); }
};

CorrelationMap build_correlation_map(const UniformSeries& a,
                                     const UniformSeries& b,
                                     const TrackerConfig& cfg);

struct TrajectoryPoint {
    Timestamp t_us = 0;
    double lag_s = 0.0;
    double score = 0.0;
    double position_m = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points; // strictly increasing time
    double velocity_m_s = 0.0;
    std::optional<Timestamp> eta_us;
    double mean_score = 0.0;
    double baseline_lag_s = 0.0; // detected direct-arrival lag
};

/// Chains correlation peaks outside the direct-arrival ridge into the
/// best monotone-lag path (dynamic programming, summed score). Returns
/// nullopt when no path reaches min_mean_score.
std::optional<Trajectory> extract_trajectory(const CorrelationMap& map,
                                             const TrackerConfig& cfg,
                                             const SegmentMeta& seg);

/// Echo model x = c*(lag - tau0)/2, clamped to [0, length_m].
double lag_to_position_m(double lag_s, double baseline_lag_s,
                         const TrackerConfig& cfg, double length_m);

double position_to_lag_s(double x_m, double baseline_lag_s,
                         const TrackerConfig& cfg);

/// Map CSV: header `time_us,<lag>...`, one row per column.
void write_correlation_map_csv(const CorrelationMap& map,
                               const std::string& path);

/// Trajectory CSV: `time_us,lag_s,position_m,score`.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

} // namespace pigflow
