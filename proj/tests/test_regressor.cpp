#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "pigflow/error.hpp"
#include "pigflow/regressor.hpp"

using namespace pigflow;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& x,
                     const std::vector<double>& y) {
    Dataset d;
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::array<double, kFeatureCount> row{};
        for (std::size_t f = 0; f < x[i].size(); ++f) row[f] = x[i][f];
        d.x.push_back(row);
        d.y.push_back(y[i]);
        d.t_us.push_back(static_cast<Timestamp>(i) * 60000000);
    }
    return d;
}

Dataset random_dataset(std::mt19937_64& rng, std::size_t max_rows,
                       std::size_t n_features) {
    std::uniform_int_distribution<std::size_t> rows_d(4, max_rows);
    std::uniform_real_distribution<double> v(0.0, 1.0);
    const std::size_t rows = rows_d(rng);
    std::vector<std::vector<double>> x(rows,
                                       std::vector<double>(n_features));
    std::vector<double> y(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& f : x[i]) f = v(rng);
        y[i] = v(rng);
    }
    return make_dataset(x, y);
}

/// Exhaustive split search over every feature and midpoint threshold,
/// two-pass SSE computation. Independent of the training path.
struct BruteSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double total_sse = 0.0;
};

BruteSplit brute_force_root_split(const Dataset& d, const TrainConfig& cfg,
                                  std::size_t n_features) {
    BruteSplit best;
    const auto sse_of = [&](const std::vector<double>& ys) {
        double mean = 0;
        for (double v : ys) mean += v;
        mean /= static_cast<double>(ys.size());
        double sse = 0;
        for (double v : ys) sse += (v - mean) * (v - mean);
        return sse;
    };
    std::vector<double> all(d.y);
    const double parent_sse = sse_of(all);
    const double n = static_cast<double>(d.size());

    for (std::size_t f = 0; f < n_features; ++f) {
        std::vector<double> vals;
        for (const auto& row : d.x) vals.push_back(row[f]);
        std::vector<double> uniq(vals);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (std::size_t u = 0; u + 1 < uniq.size(); ++u) {
            const double thr = uniq[u] + (uniq[u + 1] - uniq[u]) / 2.0;
            std::vector<double> left, right;
            for (std::size_t i = 0; i < d.size(); ++i)
                (d.x[i][f] <= thr ? left : right).push_back(d.y[i]);
            if (left.size() < static_cast<std::size_t>(cfg.min_samples_leaf) ||
                right.size() < static_cast<std::size_t>(cfg.min_samples_leaf))
                continue;
            const double total = sse_of(left) + sse_of(right);
            const double gain = (parent_sse - total) / n;
            if (gain < cfg.min_mse_decrease) continue;
            if (!best.found || total < best.total_sse) {
                best.found = true;
                best.total_sse = total;
                best.feature = static_cast<int>(f);
                best.threshold = thr;
            }
        }
    }
    return best;
}

TrainConfig interpolating_config() {
    TrainConfig cfg;
    cfg.max_depth = 64;
    cfg.min_samples_leaf = 1;
    cfg.min_mse_decrease = 0.0;
    return cfg;
}

} // namespace

TEST_CASE("constant targets collapse to a single leaf") {
    const Dataset d = make_dataset({{1.0}, {2.0}, {3.0}, {4.0}},
                                   {0.5, 0.5, 0.5, 0.5});
    const DecisionTreeModel model = fit_tree(d, TrainConfig{});
    REQUIRE(model.nodes.size() == 1);
    CHECK(model.nodes[0].is_leaf());
    CHECK(model.nodes[0].value == 0.5);
    const EvalReport rep = evaluate(predict(model, d), d.y);
    CHECK(rep.rms_error == 0.0);
}

TEST_CASE("the textbook 1-D split lands at the midpoint") {
    const Dataset d =
        make_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {0.0, 0.0, 1.0, 1.0});
    TrainConfig cfg = interpolating_config();
    cfg.max_depth = 1;
    const DecisionTreeModel model = fit_tree(d, cfg);
    REQUIRE(model.nodes.size() == 3);
    CHECK(model.nodes[0].feature == 0);
    CHECK(model.nodes[0].threshold == 2.5);
    const double left = model.nodes[static_cast<std::size_t>(
        model.nodes[0].left)].value;
    const double right = model.nodes[static_cast<std::size_t>(
        model.nodes[0].right)].value;
    CHECK(left == 0.0);
    CHECK(right == 1.0);

    // matches the exhaustive search over the 3 candidate thresholds
    const BruteSplit brute = brute_force_root_split(d, cfg, 1);
    CHECK(brute.feature == 0);
    CHECK(brute.threshold == 2.5);
}

TEST_CASE("interpolating configuration drives training error to zero") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        const Dataset d = random_dataset(rng, 48, 3);
        const DecisionTreeModel model = fit_tree(d, interpolating_config());
        const std::vector<double> y_hat = predict(model, d);
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(y_hat[i] == d.y[i]); // bit-exact
        CHECK(evaluate(y_hat, d.y).rms_error == 0.0);
    }
}

TEST_CASE("root split equals the brute-force optimum on random data") {
    std::mt19937_64 rng(72);
    TrainConfig cfg;
    cfg.min_samples_leaf = 2;
    cfg.max_depth = 1;
    cfg.min_mse_decrease = 1e-12;
    for (int trial = 0; trial < 60; ++trial) {
        const Dataset d = random_dataset(rng, 64, 3);
        const BruteSplit brute = brute_force_root_split(d, cfg, 3);
        const DecisionTreeModel model = fit_tree(d, cfg);
        if (!brute.found) {
            CHECK(model.nodes.size() == 1);
            continue;
        }
        REQUIRE(!model.nodes[0].is_leaf());
        CHECK(model.nodes[0].feature == brute.feature);
        CHECK(model.nodes[0].threshold == brute.threshold);
    }
}

TEST_CASE("zero-gain splits untangle XOR only when the floor allows") {
    const Dataset d = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}},
                                   {0.0, 1.0, 1.0, 0.0});
    // with the gain floor the root refuses to split
    TrainConfig floor_cfg = interpolating_config();
    floor_cfg.min_mse_decrease = 1e-7;
    const DecisionTreeModel stumped = fit_tree(d, floor_cfg);
    REQUIRE(stumped.nodes.size() == 1);
    CHECK(stumped.nodes[0].value == 0.5);
    // with a zero floor the tree interpolates through zero-gain splits
    const DecisionTreeModel full = fit_tree(d, interpolating_config());
    const std::vector<double> y_hat = predict(full, d);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(y_hat[i] == d.y[i]);
}

TEST_CASE("rows at the threshold route left") {
    DecisionTreeModel model;
    model.nodes.push_back({0, 2.5, 1, 2, 0.0});
    model.nodes.push_back({-1, 0.0, -1, -1, 10.0});
    model.nodes.push_back({-1, 0.0, -1, -1, 20.0});
    std::array<double, kFeatureCount> row{};
    row[0] = 2.5;
    CHECK(model.predict_row(row) == 10.0);
    row[0] = 2.5000001;
    CHECK(model.predict_row(row) == 20.0);
}

TEST_CASE("min_samples_leaf is respected") {
    std::mt19937_64 rng(73);
    const Dataset d = random_dataset(rng, 64, 2);
    TrainConfig cfg;
    cfg.min_samples_leaf = 5;
    cfg.max_depth = 16;
    cfg.min_mse_decrease = 0.0;
    const DecisionTreeModel model = fit_tree(d, cfg);
    // count rows reaching each leaf
    std::map<int, int> leaf_rows;
    for (const auto& x : d.x) {
        int i = 0;
        while (!model.nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = model.nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] <= n.threshold
                    ? n.left
                    : n.right;
        }
        leaf_rows[i]++;
    }
    for (const auto& [leaf, count] : leaf_rows) CHECK(count >= 5);
}

TEST_CASE("predictions stay inside the training target range") {
    std::mt19937_64 rng(74);
    const Dataset train = random_dataset(rng, 64, 3);
    const DecisionTreeModel model = fit_tree(train, TrainConfig{2, 2, 0.0});
    const auto [mn, mx] = std::minmax_element(train.y.begin(), train.y.end());
    const Dataset probe = random_dataset(rng, 64, 3);
    for (double v : predict(model, probe)) {
        CHECK(v >= *mn);
        CHECK(v <= *mx);
    }
}

TEST_CASE("evaluate implements the rms/accuracy identity") {
    SUBCASE("perfect prediction") {
        const std::vector<double> y{0.2, 0.4, 0.8};
        const EvalReport rep = evaluate(y, y);
        CHECK(rep.rms_error == 0.0);
        CHECK(rep.accuracy_pct == 100.0);
    }
    SUBCASE("alternating +-0.1 errors give rms 0.1, accuracy 90%") {
        const std::vector<double> y{0.5, 0.5, 0.5, 0.5};
        const std::vector<double> y_hat{0.6, 0.4, 0.6, 0.4};
        const EvalReport rep = evaluate(y_hat, y);
        CHECK(rep.rms_error == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(rep.accuracy_pct == doctest::Approx(90.0).epsilon(1e-12));
    }
    SUBCASE("identity holds exactly as computed") {
        std::mt19937_64 rng(75);
        std::uniform_real_distribution<double> v(0.0, 1.0);
        std::vector<double> y(100), y_hat(100);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = v(rng);
            y_hat[i] = v(rng);
        }
        const EvalReport rep = evaluate(y_hat, y);
        CHECK(rep.accuracy_pct == 100.0 * (1.0 - rep.rms_error));
    }
    SUBCASE("rms is invariant under row permutation") {
        std::mt19937_64 rng(76);
        std::uniform_real_distribution<double> v(0.0, 1.0);
        std::vector<double> y(500), y_hat(500);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = v(rng);
            y_hat[i] = v(rng);
        }
        const double base = evaluate(y_hat, y).rms_error;
        std::vector<std::size_t> perm(y.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> y2, y_hat2;
        for (std::size_t i : perm) {
            y2.push_back(y[i]);
            y_hat2.push_back(y_hat[i]);
        }
        CHECK(evaluate(y_hat2, y2).rms_error ==
              doctest::Approx(base).epsilon(1e-12));
    }
    SUBCASE("errors") {
        const std::vector<double> a{0.1}, b{0.1, 0.2}, empty;
        CHECK_THROWS_AS(evaluate(a, b), Error);
        CHECK_THROWS_AS(evaluate(empty, empty), Error);
    }
}

TEST_CASE("training is deterministic and the model round-trips exactly") {
    std::mt19937_64 rng(77);
    const Dataset d = random_dataset(rng, 64, 3);
    TrainConfig cfg;
    cfg.min_samples_leaf = 3;
    cfg.max_depth = 6;
    cfg.min_mse_decrease = 0.0;
    const DecisionTreeModel m1 = fit_tree(d, cfg);
    const DecisionTreeModel m2 = fit_tree(d, cfg);
    const std::string s1 = serialize_model(m1);
    CHECK(s1 == serialize_model(m2)); // byte-identical

    const DecisionTreeModel parsed = parse_model(s1);
    CHECK(serialize_model(parsed) == s1);
    const std::vector<double> before = predict(m1, d);
    const std::vector<double> after = predict(parsed, d);
    CHECK(before == after);

    testutil::TempDir dir("model");
    write_model(m1, dir.file("model.txt"));
    CHECK(serialize_model(load_model(dir.file("model.txt"))) == s1);
}

TEST_CASE("model text format matches the documented grammar") {
    const Dataset d =
        make_dataset({{1.0}, {2.0}, {3.0}, {4.0}}, {0.0, 0.0, 1.0, 1.0});
    TrainConfig cfg = interpolating_config();
    cfg.max_depth = 1;
    const std::string text = serialize_model(fit_tree(d, cfg));
    CHECK(text == "node 0 split 0 2.5 1 2\nnode 1 leaf 0\nnode 2 leaf 1\n");
    CHECK_THROWS_AS(parse_model("node 0 frobnicate 1"), Error);
    CHECK_THROWS_AS(parse_model("node 0 split 0 2.5 1 2\nnode 1 leaf 0\n"),
                    Error); // dangling right child
}

TEST_CASE("run_protocol trains once and reports the threefold split") {
    std::mt19937_64 rng(78);
    // shared time axis: 1000 rows, one per minute
    const auto build = [&](std::uint64_t salt) {
        Dataset d;
        std::mt19937_64 local(salt);
        std::uniform_real_distribution<double> v(0.0, 1.0);
        for (int i = 0; i < 1000; ++i) {
            d.t_us.push_back(static_cast<Timestamp>(i) * 60000000);
            std::array<double, kFeatureCount> x{};
            const double h = v(local);
            for (auto& f : x) f = h;
            d.x.push_back(x);
            d.y.push_back(h); // target equals the feature: learnable
        }
        return d;
    };
    std::map<std::string, Dataset> datasets;
    datasets["A-C"] = build(1);
    datasets["A-B"] = build(2);
    datasets["B-C"] = build(3);

    ProtocolConfig cfg;
    cfg.train_segment = "A-C";
    cfg.train_from = 0;
    cfg.train_to = 700 * 60000000LL;
    cfg.train.min_samples_leaf = 5;
    cfg.train.max_depth = 10;
    cfg.train.min_mse_decrease = 0.0;

    const ProtocolResult res = run_protocol(datasets, cfg);
    REQUIRE(res.reports.size() == 3);
    CHECK(res.reports[0].segment == "A-C");
    CHECK(res.reports[0].n_rows == 300); // later span only
    CHECK(res.reports[1].segment == "A-B");
    CHECK(res.reports[1].n_rows == 1000);
    CHECK(res.reports[2].segment == "B-C");
    for (const auto& rep : res.reports) CHECK(rep.accuracy_pct > 90.0);

    SUBCASE("identical segment data yields identical reports") {
        datasets["B-C"] = datasets["A-B"];
        const ProtocolResult again = run_protocol(datasets, cfg);
        CHECK(again.reports[1].rms_error == again.reports[2].rms_error);
        CHECK(again.reports[1].n_rows == again.reports[2].n_rows);
    }
    SUBCASE("missing training segment is an error") {
        datasets.erase("A-C");
        CHECK_THROWS_AS(run_protocol(datasets, cfg), Error);
    }
    SUBCASE("empty test span names the segment") {
        ProtocolConfig late = cfg;
        late.train_to = 2000 * 60000000LL; // nothing left to test
        try {
            run_protocol(datasets, late);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("A-C") != std::string::npos);
        }
    }
}

TEST_CASE("every split reduces the weighted training MSE") {
    std::mt19937_64 rng(79);
    const Dataset d = random_dataset(rng, 64, 3);
    TrainConfig cfg;
    cfg.min_samples_leaf = 2;
    cfg.max_depth = 8;
    cfg.min_mse_decrease = 1e-12;
    const DecisionTreeModel model = fit_tree(d, cfg);

    // recompute node statistics by routing every row
    struct NodeStat {
        std::vector<double> y;
    };
    std::map<int, NodeStat> stats;
    for (std::size_t r = 0; r < d.size(); ++r) {
        int i = 0;
        stats[0].y.push_back(d.y[r]);
        while (!model.nodes[static_cast<std::size_t>(i)].is_leaf()) {
            const TreeNode& n = model.nodes[static_cast<std::size_t>(i)];
            i = d.x[r][static_cast<std::size_t>(n.feature)] <= n.threshold
                    ? n.left
                    : n.right;
            stats[i].y.push_back(d.y[r]);
        }
    }
    const auto mse_of = [](const std::vector<double>& ys) {
        double mean = 0;
        for (double v : ys) mean += v;
        mean /= static_cast<double>(ys.size());
        double s = 0;
        for (double v : ys) s += (v - mean) * (v - mean);
        return s / static_cast<double>(ys.size());
    };
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const TreeNode& n = model.nodes[i];
        if (n.is_leaf()) continue;
        const auto& parent = stats[static_cast<int>(i)].y;
        const auto& left = stats[n.left].y;
        const auto& right = stats[n.right].y;
        const double weighted =
            (mse_of(left) * static_cast<double>(left.size()) +
             mse_of(right) * static_cast<double>(right.size())) /
            static_cast<double>(parent.size());
        CHECK(weighted <= mse_of(parent) + 1e-12);
    }
}
