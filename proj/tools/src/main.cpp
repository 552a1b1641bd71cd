#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "qus/version.hpp"
#include "qusapp/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qusnak: Nakagami parametric imaging experiments"};
    app.set_version_flag("--version", std::string("qusnak ") + qus::kVersion);
    app.require_subcommand(1, 1);

    std::string config_path;
    qusapp::Overrides ov;
    std::string chosen;
    for (const char* name : {"simulate", "train", "estimate", "evaluate", "compare"}) {
        static const std::map<std::string, std::string> help{
            {"simulate", "generate ground-truth phantoms and envelope images"},
            {"train", "fit the score model and write a checkpoint"},
            {"estimate", "compute one m map per configured estimator per image"},
            {"evaluate", "PSNR/RMSE tables and the optional cohort report"},
            {"compare", "simulate, train when needed, estimate and evaluate"}};
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config_path, "INI experiment configuration")->required();
        sub->add_option("--seed", ov.seed, "override [run] seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--output", ov.output, "override [run] output directory");
        sub->add_option("--threads", ov.threads, "worker threads (default: QUS_THREADS or 1)")
            ->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qusapp::kConfigError;
    }

    try {
        auto cfg = qusapp::load_config(config_path);
        qusapp::apply(cfg, ov);
        qusapp::run_command(chosen, cfg);
        std::cout << chosen << ": done (" << cfg.output.string() << ")\n";
        return qusapp::kOk;
    } catch (const std::exception& e) {
        std::cerr << "qusnak " << chosen << ": " << e.what() << '\n';
        return qusapp::exit_code_for(e);
    }
}
