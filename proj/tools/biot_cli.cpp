#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "biot/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw biot::ConfigError(path, "cannot open config file");
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-stress Biot solver with functional a posteriori majorants"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print this help");

    CLI::App* run = app.add_subcommand("run", "run a sweep of experiments and write CSV results");
    run->set_help_flag("--help", "print this help");  // -h is the mesh size
    std::string config_path;
    bool dry = false;
    run->add_option("--config", config_path, "key = value file with [section] headers; flags override it");
    run->add_flag("--dry-run", dry, "validate and print the resolved configuration without running");

    // Every config key doubles as a flag. Values stay textual so that file and
    // flag share one parser and one set of error messages.
    std::map<std::string, std::string> flags;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    for (const biot::ConfigKey& k : biot::config_keys())
        options.emplace_back(k.name, run->add_option("--" + k.name, flags[k.name], k.help)->group(k.section));

    CLI::App* keys = app.add_subcommand("keys", "list configuration keys");

    CLI11_PARSE(app, argc, argv);

    if (keys->parsed()) {
        for (const biot::ConfigKey& k : biot::config_keys())
            std::cout << "[" << k.section << "] " << k.name << ": " << k.help << "\n";
        return 0;
    }

    biot::RunConfig cfg;
    try {
        if (!config_path.empty())
            biot::apply_config(cfg, biot::parse_config_text(read_file(config_path), config_path), config_path);
        for (const auto& [name, opt] : options) {
            if (opt->count() == 0) continue;
            try {
                biot::set_config_value(cfg, name, flags[name]);
            } catch (const std::invalid_argument& e) {
                throw biot::ConfigError("--" + name, e.what());
            }
        }
        biot::validate(cfg);
    } catch (const biot::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    if (dry) {
        std::cout << biot::config_text(cfg);
        return 0;
    }
    try {
        biot::run_experiment(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "results written to " << cfg.out << "\n";
    return 0;
}
