#pragma once

#include <string>

#include "pigflow/series.hpp"

namespace pigflow {

struct FluidProps {
    double density_kg_m3 = 900.0; // medium-weight crude
    double gravity_m_s2 = 9.81;
};

/// Per-station hydrostatic correction relative to the reference station.
struct CompensationEntry {
    std::string station;
    double dz_m = 0.0;  // altitude - altitude of reference station
    double dp_pa = 0.0; // -rho * g * dz
};

/// Per-segment normalized head loss, bar/km. long_term is the 1-week
/// trailing mean of short_term on the same grid.
struct HeadLossSeries {
    SegmentMeta segment;
    UniformSeries short_term;
    UniformSeries long_term;
};

/// dP = -rho * g * dz, in pascals.
double hydrostatic_dp_pa(const FluidProps& f, double dz_m);

CompensationEntry make_compensation(const FluidProps& f,
                                    const StationMeta& station,
                                    const StationMeta& reference);

/// P' = P - dP/1e5 per non-MISSING bin; input and output in bar.
UniformSeries compensate(const UniformSeries& u_bar, double dp_pa);

/// (up - down) / length_km per bin over the overlapping grid range;
/// MISSING wherever either input is. Throws on incompatible grids.
UniformSeries head_loss(const UniformSeries& up, const UniformSeries& down,
                        const SegmentMeta& seg);

inline constexpr double kWeekSeconds = 604800.0;

/// Trailing (causal) mean over the last window_s seconds, including the
/// current bin. Output is MISSING when fewer than min_coverage of the
/// window's bins hold data.
UniformSeries moving_average(const UniformSeries& u,
                             double window_s = kWeekSeconds,
                             double min_coverage = 0.10);

/// Worst-case compensation error (bar) when the true density differs
/// from the assumed one: |rho_true - rho_assumed| * g * |dz| / 1e5.
double density_error_bound_bar(const FluidProps& assumed, double rho_true,
                               double dz_m);

HeadLossSeries build_head_loss(const UniformSeries& up_compensated,
                               const UniformSeries& down_compensated,
                               const SegmentMeta& seg,
                               double smoothing_window_s = kWeekSeconds);

/// Head-loss CSV: `bin_start_us,short_term_bar_per_km,long_term_bar_per_km`
/// with empty fields for MISSING bins.
void write_head_loss_csv(const HeadLossSeries& h, const std::string& path);
HeadLossSeries load_head_loss_csv(const std::string& path,
                                  const SegmentMeta& seg);

} // namespace pigflow
