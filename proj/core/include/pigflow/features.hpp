#pragma once

#include <array>
#include <string>
#include <vector>

#include "pigflow/series.hpp"

namespace pigflow {

/// Percentile-anchored linear rescaling of long-term head loss onto
/// [0,1] (clamped outside the anchors). The anchors are fitted on the
/// training span only.
struct MappingConfig {
    double lo_percentile = 1.0;
    double hi_percentile = 99.0;
    double h_lo = 0.0;
    double h_hi = 0.0;
};

struct PigIndicatorSeries {
    SegmentMeta segment;
    UniformSeries y; // values in [0,1]
};

/// Rolling-statistic feature windows, hours.
inline constexpr std::array<int, 3> kFeatureWindowsHours{8, 16, 24};
inline constexpr std::size_t kFeatureCount = 9;

/// Column order is part of the model contract.
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames{
    "mean8", "min8", "max8", "mean16", "min16",
    "max16", "mean24", "min24", "max24"};

struct FeatureRow {
    Timestamp t_us = 0;
    std::array<double, kFeatureCount> values{}; // (mean,min,max) x (8,16,24) h
};

/// Fits h_lo/h_hi to the configured percentiles of the non-MISSING
/// training bins. Requires >= 1000 such bins and a non-degenerate range.
MappingConfig fit_mapping(const UniformSeries& long_term, Timestamp train_from,
                          Timestamp train_to, MappingConfig base = {});

/// y = clamp((h - h_lo)/(h_hi - h_lo), 0, 1); MISSING preserved.
UniformSeries build_pig_indicator(const UniformSeries& long_term,
                                  const MappingConfig& m);

/// Trailing windows of 8/16/24 h over the short-term head loss; a
/// window with less than min_coverage non-MISSING bins voids the row.
std::vector<FeatureRow> rolling_features(const UniformSeries& short_term,
                                         double min_coverage = 0.5);

struct Dataset {
    std::vector<Timestamp> t_us;
    std::vector<std::array<double, kFeatureCount>> x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    bool empty() const { return y.empty(); }
};

/// Inner join of feature rows with the indicator on the timestamp;
/// rows without a target are dropped. Empty result is an error.
Dataset assemble_dataset(const std::vector<FeatureRow>& features,
                         const UniformSeries& indicator);

/// Chronological sub-dataset with t in [from, to).
Dataset slice_dataset(const Dataset& d, Timestamp from, Timestamp to);

/// Dataset CSV, exact header:
/// `t_us,mean8,min8,max8,mean16,min16,max16,mean24,min24,max24,target`.
void write_dataset_csv(const Dataset& d, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

void write_mapping_csv(const MappingConfig& m, const std::string& path);
MappingConfig load_mapping_csv(const std::string& path);

} // namespace pigflow
