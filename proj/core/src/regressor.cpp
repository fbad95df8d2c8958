#include "pigflow/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pigflow/error.hpp"
#include "pigflow/textio.hpp"

namespace pigflow {

double DecisionTreeModel::predict_row(std::span<const double> x) const {
    if (nodes.empty()) throw Error("predict: empty model");
    if (x.size() != kFeatureCount)
        throw Error("predict: expected " + std::to_string(kFeatureCount) +
                    " features, got " + std::to_string(x.size()));
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                  : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

namespace {

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0; // parent MSE minus weighted child MSE
};

struct Builder {
    const Dataset& d;
    const TrainConfig& cfg;
    std::vector<TreeNode> nodes;

    // Best split over all features for the rows in `idx`, already given
    // the node's target sum/sum-of-squares. Candidates are midpoints of
    // consecutive distinct sorted values; both children must satisfy
    // min_samples_leaf. Strict `>` comparisons while scanning features
    // in ascending index and thresholds in ascending order implement
    // the (feature, threshold) tie-break.
    Split best_split(std::vector<std::size_t>& idx, double sum,
                     double sum_sq) const {
        const auto n = static_cast<double>(idx.size());
        const double parent_mse = sum_sq / n - (sum / n) * (sum / n);
        Split best;
        std::vector<std::size_t> order(idx.size());
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return d.x[idx[a]][f] < d.x[idx[b]][f];
                      });
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t pos = 0; pos + 1 < idx.size(); ++pos) {
                const double y = d.y[idx[order[pos]]];
                left_sum += y;
                left_sq += y * y;
                const double v = d.x[idx[order[pos]]][f];
                const double next = d.x[idx[order[pos + 1]]][f];
                if (v == next) continue;
                const auto nl = static_cast<double>(pos + 1);
                const auto nr = n - nl;
                if (nl < cfg.min_samples_leaf || nr < cfg.min_samples_leaf)
                    continue;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double mse_l =
                    left_sq / nl - (left_sum / nl) * (left_sum / nl);
                const double mse_r =
                    right_sq / nr - (right_sum / nr) * (right_sum / nr);
                const double weighted = (nl * mse_l + nr * mse_r) / n;
                const double gain = parent_mse - weighted;
                if (gain > best.gain || !best.found) {
                    if (!best.found && gain < cfg.min_mse_decrease) continue;
                    best.found = true;
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.threshold = v + (next - v) / 2.0;
                }
            }
        }
        return best;
    }

    int build(std::vector<std::size_t> idx, int depth) {
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t i : idx) {
            sum += d.y[i];
            sum_sq += d.y[i] * d.y[i];
        }
        const auto n = static_cast<double>(idx.size());

        const auto make_leaf = [&]() {
            TreeNode leaf;
            auto [mn, mx] = std::minmax_element(
                idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return d.y[a] < d.y[b]; });
            // Mean of identical targets is that target; short-circuit so
            // interpolating trees reproduce training targets bit-exactly.
            leaf.value = d.y[*mn] == d.y[*mx] ? d.y[*mn] : sum / n;
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        };

        if (depth >= cfg.max_depth ||
            idx.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf))
            return make_leaf();
        const double parent_mse = sum_sq / n - (sum / n) * (sum / n);
        if (parent_mse <= 0.0) return make_leaf();

        Split split = best_split(idx, sum, sum_sq);
        if (!split.found || split.gain < cfg.min_mse_decrease)
            return make_leaf();

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (d.x[i][static_cast<std::size_t>(split.feature)] <=
                split.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        const auto node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        const int l = build(std::move(left_idx), depth + 1);
        const int r = build(std::move(right_idx), depth + 1);
        nodes[static_cast<std::size_t>(node_id)].left = l;
        nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

} // namespace

DecisionTreeModel fit_tree(const Dataset& d, const TrainConfig& cfg) {
    if (d.empty()) throw Error("fit_tree: empty dataset");
    if (cfg.max_depth < 1 || cfg.min_samples_leaf < 1)
        throw Error("fit_tree: invalid training config");
    Builder b{d, cfg, {}};
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    b.build(std::move(idx), 0);
    return DecisionTreeModel{std::move(b.nodes)};
}

std::vector<double>
predict(const DecisionTreeModel& model,
        const std::vector<std::array<double, kFeatureCount>>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(model.predict_row(row));
    return out;
}

std::vector<double> predict(const DecisionTreeModel& model, const Dataset& d) {
    return predict(model, d.x);
}

EvalReport evaluate(std::span<const double> y_hat, std::span<const double> y) {
    if (y_hat.size() != y.size())
        throw Error("evaluate: prediction/target length mismatch");
    if (y.empty()) throw Error("evaluate: empty input");
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y_hat[i] - y[i];
        sq += e * e;
    }
    EvalReport r;
    r.n_rows = y.size();
    r.rms_error = std::sqrt(sq / static_cast<double>(y.size()));
    r.accuracy_pct = 100.0 * (1.0 - r.rms_error);
    return r;
}

std::string serialize_model(const DecisionTreeModel& model) {
    std::string out;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const TreeNode& n = model.nodes[i];
        out += "node " + std::to_string(i);
        if (n.is_leaf()) {
            out += " leaf " + format_double(n.value);
        } else {
            out += " split " + std::to_string(n.feature) + " " +
                   format_double(n.threshold) + " " + std::to_string(n.left) +
                   " " + std::to_string(n.right);
        }
        out += '\n';
    }
    return out;
}

DecisionTreeModel parse_model(const std::string& text) {
    DecisionTreeModel model;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, kind;
        std::size_t id = 0;
        if (!(ls >> tag >> id >> kind) || tag != "node" ||
            id != model.nodes.size())
            throw ParseError("malformed model line", line_no);
        TreeNode n;
        if (kind == "leaf") {
            std::string value;
            if (!(ls >> value)) throw ParseError("malformed leaf", line_no);
            bool ok = false;
            n.value = parse_double(value, ok);
            if (!ok) throw ParseError("malformed leaf value", line_no);
        } else if (kind == "split") {
            std::string threshold;
            if (!(ls >> n.feature >> threshold >> n.left >> n.right))
                throw ParseError("malformed split", line_no);
            bool ok = false;
            n.threshold = parse_double(threshold, ok);
            if (!ok || n.feature < 0 ||
                n.feature >= static_cast<int>(kFeatureCount))
                throw ParseError("malformed split", line_no);
        } else {
            throw ParseError("unknown node kind '" + kind + "'", line_no);
        }
        model.nodes.push_back(n);
    }
    if (model.nodes.empty()) throw Error("parse_model: empty model");
    for (const TreeNode& n : model.nodes)
        if (!n.is_leaf() &&
            (n.left <= 0 || n.right <= 0 ||
             n.left >= static_cast<int>(model.nodes.size()) ||
             n.right >= static_cast<int>(model.nodes.size())))
            throw Error("parse_model: dangling child reference");
    return model;
}

void write_model(const DecisionTreeModel& model, const std::string& path) {
    write_file_atomic(path, serialize_model(model));
}

DecisionTreeModel load_model(const std::string& path) {
    return parse_model(read_file(path));
}

ProtocolResult run_protocol(const std::map<std::string, Dataset>& datasets,
                            const ProtocolConfig& cfg) {
    const auto it = datasets.find(cfg.train_segment);
    if (it == datasets.end())
        throw Error("run_protocol: missing training segment dataset " +
                    cfg.train_segment);
    if (!(cfg.train_from < cfg.train_to))
        throw Error("run_protocol: invalid training span");

    const Dataset train =
        slice_dataset(it->second, cfg.train_from, cfg.train_to);
    if (train.empty())
        throw Error("run_protocol: training span has no rows on segment " +
                    cfg.train_segment);

    ProtocolResult res;
    res.model = fit_tree(train, cfg.train);

    const auto eval_on = [&](const std::string& name, const Dataset& ds,
                             Timestamp from, Timestamp to) {
        if (ds.empty())
            throw Error("run_protocol: empty test span on segment " + name);
        EvalReport rep = evaluate(predict(res.model, ds), ds.y);
        rep.segment = name;
        rep.from_us = from;
        rep.to_us = to;
        res.reports.push_back(rep);
    };

    // Later span of the training segment first.
    const Dataset in_time = slice_dataset(it->second, cfg.train_to,
                                          std::numeric_limits<Timestamp>::max());
    if (in_time.empty())
        throw Error("run_protocol: test span has no rows on segment " +
                    cfg.train_segment);
    eval_on(cfg.train_segment, in_time, cfg.train_to,
            in_time.t_us.back() + 1);

    for (const auto& [name, ds] : datasets) {
        if (name == cfg.train_segment) continue;
        if (ds.empty())
            throw Error("run_protocol: empty dataset for segment " + name);
        eval_on(name, ds, ds.t_us.front(), ds.t_us.back() + 1);
    }
    return res;
}

} // namespace pigflow
