#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pigflow/features.hpp"

namespace pigflow {

struct TrainConfig {
    int max_depth = 8;
    int min_samples_leaf = 50;
    double min_mse_decrease = 1e-7;
};

/// Flat node storage; children referenced by index, -1 marks a leaf.
/// Rows with feature <= threshold go left.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf prediction (mean of training targets)

    bool is_leaf() const { return left < 0; }
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict_row(std::span<const double> x) const;
};

/// Greedy CART with MSE splitting. Candidate thresholds are midpoints
/// of consecutive sorted unique feature values; ties break on the
/// lowest feature index, then the lowest threshold. Deterministic.
DecisionTreeModel fit_tree(const Dataset& d, const TrainConfig& cfg);

std::vector<double>
predict(const DecisionTreeModel& model,
        const std::vector<std::array<double, kFeatureCount>>& rows);

std::vector<double> predict(const DecisionTreeModel& model, const Dataset& d);

/// Eq.-style evaluation: rms = sqrt(mean((y_hat - y)^2)),
/// accuracy_pct = 100*(1 - rms).
struct EvalReport {
    std::string segment;
    Timestamp from_us = 0;
    Timestamp to_us = 0;
    std::size_t n_rows = 0;
    double rms_error = 0.0;
    double accuracy_pct = 0.0;
};

EvalReport evaluate(std::span<const double> y_hat, std::span<const double> y);

/// Line-oriented model format, round-trips exactly:
///   node <id> split <feature> <threshold> <left_id> <right_id>
///   node <id> leaf <value>
std::string serialize_model(const DecisionTreeModel& model);
DecisionTreeModel parse_model(const std::string& text);
void write_model(const DecisionTreeModel& model, const std::string& path);
DecisionTreeModel load_model(const std::string& path);

/// Train on one segment's earlier span, test on that segment's later
/// span and on the other segments' full spans.
struct ProtocolConfig {
    std::string train_segment = "A-C";
    Timestamp train_from = 0;
    Timestamp train_to = 0;
    TrainConfig train;
};

struct ProtocolResult {
    DecisionTreeModel model;
    std::vector<EvalReport> reports; // train-segment test first, rest by name
};

ProtocolResult run_protocol(const std::map<std::string, Dataset>& datasets,
                            const ProtocolConfig& cfg);

} // namespace pigflow
