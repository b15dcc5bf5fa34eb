#include <iostream>

#include "CLI11.hpp"
#include "ucc/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ucc - universal channel-code construction and simulation"};
    app.require_subcommand(1);

    std::string config_path;
    ucc::CliOverrides ov;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out_dir;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config file (JSON)")->required();
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--workers", workers, "worker threads (0 = all available)");
        sub->add_option("--out", out_dir, "output directory override");
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment and write CSV/JSON reports");
    add_common(run);
    CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", config_path, "experiment config file (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        const auto diags = ucc::validate_experiment_file(config_path);
        if (diags.empty()) {
            std::cout << "ok\n";
            return 0;
        }
        for (const auto& d : diags) std::cout << d << "\n";
        return 2;
    }

    if (run->count("--seed")) ov.seed = seed;
    if (run->count("--workers")) ov.workers = workers;
    if (run->count("--out")) ov.out_dir = out_dir;
    const auto res = ucc::run_experiment_file(config_path, ov);
    if (res.exit_code == 0) {
        for (const auto& f : res.output_files) std::cout << f << "\n";
    } else {
        std::cerr << res.message << "\n";
    }
    return res.exit_code;
}
