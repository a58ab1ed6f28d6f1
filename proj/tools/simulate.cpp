#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "rffsim/config.hpp"
#include "rffsim/errors.hpp"
#include "rffsim/experiments.hpp"

namespace {

int run(rffsim::sim::ExperimentKind expected, const std::string& config_path,
        const std::optional<std::uint64_t>& seed_override, const std::string& out_dir) {
    using namespace rffsim;
    sim::ExperimentConfig cfg;
    try {
        cfg = sim::parse_config_file(config_path);
        if (cfg.experiment != expected) {
            throw ConfigError({"config declares experiment '" + sim::to_string(cfg.experiment) +
                               "' but the subcommand expects '" + sim::to_string(expected) +
                               "'"});
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (seed_override) cfg.seed = *seed_override;

    try {
        const auto records = sim::run_experiment(cfg, out_dir);
        std::cout << sim::to_string(cfg.experiment) << ": " << records.size()
                  << " metric records written to " << out_dir << "\n";
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random Fourier feature link simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* kernel = app.add_subcommand("kernel-bench", "kernel approximation sweep");
    add_common(kernel);
    auto* losnlos = app.add_subcommand("losnlos", "LOS/NLOS classification experiment");
    add_common(losnlos);
    auto* ldpc = app.add_subcommand("ldpc-ber", "LDPC BER sweep over the VLC channel");
    add_common(ldpc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    using rffsim::sim::ExperimentKind;
    if (kernel->parsed()) return run(ExperimentKind::KernelBench, config_path, seed_override, out_dir);
    if (losnlos->parsed()) return run(ExperimentKind::LosNlos, config_path, seed_override, out_dir);
    return run(ExperimentKind::LdpcBer, config_path, seed_override, out_dir);
}
