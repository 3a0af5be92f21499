#include "pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace vaxopt::cli;

    CLI::App app{"Stochastic epidemic calibration and vaccination-policy optimization"};
    app.require_subcommand(1);

    std::string config, out, mode;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
    const auto add_shared = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--out", out, "output directory");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--mode", mode, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
        sub->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
    };
    for (const auto& [name, help] : {std::pair{"ingest", "parse surveillance files into compartment series"},
                                     std::pair{"calibrate", "fit epidemic parameters"},
                                     std::pair{"optimize", "train the vaccination policy and compare strategies"},
                                     std::pair{"sweep", "run sensitivity sweeps"},
                                     std::pair{"report", "regenerate tables and figures"}}) {
        add_shared(app.add_subcommand(name, help));
    }

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    }

    auto* sub = app.get_subcommands().front();
    Options opts;
    opts.config_path = config;
    if (sub->count("--out")) {
        opts.out_dir = out;
    }
    if (sub->count("--seed")) {
        opts.seed = seed;
    }
    if (sub->count("--mode")) {
        opts.mode = mode_from_string(mode);
    }
    if (sub->count("--threads")) {
        opts.threads = threads;
    }
    return run_command(sub->get_name(), opts, std::cout, std::cerr);
}
