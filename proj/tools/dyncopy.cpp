// dyncopy: train learning machines to copy a black system, then let them run.

#include "dyncopy/config.hpp"
#include "dyncopy/error.hpp"
#include "dyncopy/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Copy a dynamical system with a learning machine"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    bool show_config = false;
    for (const auto& name : dyncopy::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "JSON config merged onto the defaults")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
        sub->add_flag("--show-config", show_config, "print the validated effective config and exit");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        dyncopy::json cfg = config_path.empty() ? dyncopy::resolve_config({{"experiment", name}}, ".")
                                                : dyncopy::load_config(config_path);
        if (cfg.at("experiment").get<std::string>() != name)
            throw dyncopy::format_error{"config is for experiment '" + cfg.at("experiment").get<std::string>()
                                        + "', not '" + name + "'"};
        if (seed) cfg["seed"] = *seed;
        if (show_config) {
            dyncopy::validate_experiment(cfg);
            std::cout << cfg.dump(2) << '\n';
            return 0;
        }
        const auto summary = dyncopy::run_experiment(cfg, out_dir);
        std::cout << summary.dump(2) << '\n';
    }
    catch (const std::exception& e) {
        std::cerr << "dyncopy " << name << ": " << e.what() << '\n';
        return 1;
    }
    return 0;
}
