#include "cli.hpp"

#include <CLI11.hpp>
#include <iostream>

#include "pigflow/error.hpp"
#include "pigflow/time.hpp"
#include "stages.hpp"

namespace pigflow::cli {

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"pipeline fouling analysis & pig tracking toolkit",
                 "pigflow"};
    app.require_subcommand(1);

    std::string config_path, out_dir, from_str, to_str, segment;
    std::uint64_t seed = 0;
    double threshold = -1.0;
    app.add_option("--config", config_path, "run configuration file");
    app.add_option("--out", out_dir, "working directory for artifacts");

    struct Sub {
        CLI::App* cmd;
        void (*fn)(const RunConfig&, const StageOptions&);
    };
    std::vector<Sub> subs;
    const auto add = [&](const char* name, const char* help,
                         void (*fn)(const RunConfig&, const StageOptions&)) {
        CLI::App* cmd = app.add_subcommand(name, help);
        cmd->add_option("--from", from_str, "start of interval, ISO-8601 UTC");
        cmd->add_option("--to", to_str, "end of interval, ISO-8601 UTC");
        subs.push_back({cmd, fn});
        return cmd;
    };

    CLI::Option* seed_opt =
        add("synth", "generate the synthetic scenario", run_synth)
            ->add_option("--seed", seed, "scenario RNG seed");
    add("cleanse", "remove outliers and non-transport regimes", run_cleanse);
    add("headloss", "altitude compensation and per-segment head loss",
        run_headloss);
    add("track", "acoustic pig tracking from dynamic channels", run_track)
        ->add_option("--segment", segment, "segment as <UP>-<DOWN>");
    add("train", "build datasets and fit the regressor", run_train);
    add("predict", "evaluate the model on the test protocol", run_predict);
    CLI::Option* threshold_opt =
        add("report", "rank segments by latest pigging probability",
            run_report)
            ->add_option("--threshold", threshold,
                         "flagging threshold in [0,1]");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? default_run_config()
                                            : load_run_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        StageOptions opt;
        if (!from_str.empty()) opt.from = parse_iso8601(from_str);
        if (!to_str.empty()) opt.to = parse_iso8601(to_str);
        if (!segment.empty()) opt.segment = segment;
        if (seed_opt->count()) opt.seed = seed;
        if (threshold_opt->count()) opt.threshold = threshold;
        for (const Sub& sub : subs) {
            if (!sub.cmd->parsed()) continue;
            sub.fn(cfg, opt);
            return 0;
        }
        std::cerr << "pigflow: no subcommand selected\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "pigflow: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "pigflow: " << e.what() << "\n";
        return 1;
    }
}

} // namespace pigflow::cli
