// molcomm <experiment> --config <path> [--seed <u64>] [--out <path>]
//
// Exit status: 0 success, 2 unreadable or malformed config, 3 invalid
// parameters, 4 output not writable, 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "molcomm/experiment.hpp"

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kBadConfig = 2, kInvalid = 3, kUnwritable = 4 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous peak detection experiments for diffusive molecular links"};
    app.set_version_flag("--version", molcomm::kArtifactVersion);

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    app.add_option("experiment", experiment, "cir | threshold-sweep | offset-sweep | samples-sweep")
        ->required()
        ->check(CLI::IsMember({"cir", "threshold-sweep", "offset-sweep", "samples-sweep"}));
    app.add_option("--config", config_path, "JSON or key = value config file")->required();
    app.add_option("--seed", seed, "RNG seed (overrides the config)");
    app.add_option("--out", out, "output CSV path (overrides the config)");
    CLI11_PARSE(app, argc, argv);

    try {
        auto config = molcomm::parse_config(config_path, molcomm::parse_experiment_type(experiment));
        if (seed) config.sim.rng_seed = *seed;
        if (!out.empty()) config.output_path = out;
        const auto written = molcomm::run_experiment(config);
        std::cout << "wrote " << written.string() << " and " << molcomm::metadata_path(written).string()
                  << " (seed " << config.sim.rng_seed << ")\n";
        return kOk;
    } catch (const molcomm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kBadConfig;
    } catch (const molcomm::ValidationError& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kInvalid;
    } catch (const molcomm::OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return kUnwritable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
