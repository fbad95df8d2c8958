#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace pigflow::cli {

/// Per-invocation overrides from the command line.
struct StageOptions {
    std::optional<Timestamp> from;
    std::optional<Timestamp> to;
    std::optional<std::string> segment;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;
};

void run_synth(const RunConfig& cfg, const StageOptions& opt);
void run_cleanse(const RunConfig& cfg, const StageOptions& opt);
void run_headloss(const RunConfig& cfg, const StageOptions& opt);
void run_track(const RunConfig& cfg, const StageOptions& opt);
void run_train(const RunConfig& cfg, const StageOptions& opt);
void run_predict(const RunConfig& cfg, const StageOptions& opt);
void run_report(const RunConfig& cfg, const StageOptions& opt);

} // namespace pigflow::cli
