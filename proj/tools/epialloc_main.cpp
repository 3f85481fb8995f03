#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epialloc/error.hpp"
#include "epialloc/scenario.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path,
             const epialloc::cli::CliOptions& options, const std::string& plan_path) {
    using namespace epialloc;
    cli::ScenarioConfig config = cli::load_config(config_path);
    std::vector<std::string> written;
    if (command == "estimate") written = cli::run_estimate(config, options);
    else if (command == "allocate") written = cli::run_allocate(config, options);
    else if (command == "simulate") written = cli::run_simulate(config, options, plan_path);
    else if (command == "compare") written = cli::run_compare(config, options);
    for (const auto& path : written) std::cout << "wrote " << path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Commute-network epidemic screening and allocation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string plan_path;
    epialloc::cli::CliOptions options;
    bool seedless = false;

    app.add_option("--config", config_path, "Scenario config file")->required();
    app.add_option("--out", options.out_dir, "Output directory (overrides the config)");
    app.add_flag("--verify-lp", options.verify_lp,
                 "Cross-check every greedy LP solve against the simplex");
    // The pipeline has no random number generator anywhere; the flag just
    // records that expectation on the command line.
    app.add_flag("--seedless", seedless, "Assert the run involves no randomness (always true)");

    CLI::App* estimate = app.add_subcommand("estimate", "Fit model parameters from case history");
    CLI::App* allocate = app.add_subcommand("allocate", "Compute an allocation plan");
    CLI::App* simulate = app.add_subcommand("simulate", "Simulate one plan into a trace file");
    simulate->add_option("--plan", plan_path, "Plan file to simulate (default: no intervention)");
    CLI::App* compare = app.add_subcommand("compare", "Simulate and compare the strategies");

    CLI11_PARSE(app, argc, argv);
    (void)seedless;

    std::string command;
    if (estimate->parsed()) command = "estimate";
    else if (allocate->parsed()) command = "allocate";
    else if (simulate->parsed()) command = "simulate";
    else if (compare->parsed()) command = "compare";

    try {
        return dispatch(command, config_path, options, plan_path);
    } catch (const epialloc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        bool io = e.code() == epialloc::Errc::ParseError || e.code() == epialloc::Errc::IoError;
        return io ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
