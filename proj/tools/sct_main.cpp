#include <CLI11.hpp>

#include "sct/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Solver and simulator toolkit for singular control of reflected Brownian motion"};
    app.require_subcommand(1);

    sct::cli::Options opts;
    const std::vector<std::string> subs = {"solve-nn",       "solve-mdp",         "solve-mca",
                                           "solve-1d",       "simulate-queue",    "simulate-diffusion",
                                           "tune-lbp",       "compare",           "export-heatmap"};
    for (const auto& name : subs) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path, "JSON experiment config")->required();
        sub->add_option("--seed", opts.seed_override, "override the config seed");
        sub->add_option("--workers", opts.workers, "parallel replication workers (0 = all cores)");
        sub->add_option("--out", opts.out_override,
                        "output directory (joined with $SCT_OUT_ROOT when relative)");
        sub->callback([&opts, name] { opts.subcommand = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return sct::cli::run(opts);
}
