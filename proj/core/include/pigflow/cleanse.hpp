#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pigflow/series.hpp"

namespace pigflow {

/// Fixed sensor-error thresholds. Values at or beyond a bound are
/// discarded; only strictly inside samples survive.
struct OutlierPolicy {
    double static_min_bar = 0.5;
    double static_max_bar = 80.0;
    double dynamic_min_kpa = -200.0;
    double dynamic_max_kpa = 200.0;

    std::pair<double, double> bounds_for(ChannelKind k) const {
        return k == ChannelKind::StaticBar
                   ? std::pair{static_min_bar, static_max_bar}
                   : std::pair{dynamic_min_kpa, dynamic_max_kpa};
    }
};

enum class StateLabel { Off, Regulation, Transport };

std::string to_string(StateLabel l);
StateLabel state_label_from_string(const std::string& s);

/// Windowed statistics of static pressure feeding the state model.
struct StateFeatureRow {
    Timestamp window_start_us = 0;
    double mean_bar = 0.0;
    double std_bar = 0.0; // population std (n denominator)
};

/// Diagonal-covariance Gaussian mixture over (mean_bar, std_bar).
/// Parameters are stored in original feature units; fitting happens on
/// standardized features with a variance floor of 1e-6 per dimension.
struct GmmModel {
    int k = 0;
    std::vector<double> weights;
    std::vector<std::array<double, 2>> means;
    std::vector<std::array<double, 2>> variances;
    bool converged = false;
    double log_likelihood = 0.0;
    std::vector<double> ll_history; // one entry per EM iteration
    std::array<double, 2> feat_center{0, 0}; // standardization
    std::array<double, 2> feat_scale{1, 1};
};

/// Per-window operational labels. Each window covers
/// [window_start, window_start + window_us).
struct StateSegmentation {
    std::int64_t window_us = 0;
    std::vector<std::pair<Timestamp, StateLabel>> windows;
};

struct OutlierResult {
    PressureSeries series;
    std::size_t removed = 0;
};

OutlierResult remove_outliers(const PressureSeries& s, const OutlierPolicy& p);

/// Non-overlapping windows of window_s seconds aligned to the series
/// grid; windows touching a MISSING bin are skipped.
std::vector<StateFeatureRow> state_features(const UniformSeries& u,
                                            double window_s);

/// Deterministic EM fit (no RNG; farthest-point seeding, see source).
/// Requires at least 10*k rows and non-degenerate data.
GmmModel fit_gmm(const std::vector<StateFeatureRow>& rows, int k);

/// Maximum-responsibility assignment, k must be 3. Component-to-label
/// mapping: lowest mean pressure -> Off; of the remaining two the one
/// with higher std -> Regulation; the last -> Transport.
StateSegmentation classify_states(const GmmModel& model,
                                  const std::vector<StateFeatureRow>& rows,
                                  double window_s);

/// Bins inside windows labeled != keep become MISSING; everything else
/// (including bins not covered by any window) is untouched.
UniformSeries mask_series(const UniformSeries& u, const StateSegmentation& seg,
                          StateLabel keep);

/// States CSV: `window_start_us,label` with OFF|REGULATION|TRANSPORT.
void write_states_csv(const StateSegmentation& seg, const std::string& path);
StateSegmentation load_states_csv(const std::string& path, double window_s);

} // namespace pigflow
