#ifndef EPIALLOC_SCENARIO_HPP
#define EPIALLOC_SCENARIO_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epialloc/epi.hpp"
#include "epialloc/est.hpp"
#include "epialloc/linalg.hpp"
#include "epialloc/net.hpp"
#include "epialloc/opt.hpp"

namespace epialloc::cli {

/// One scenario as read from a key = value config file. alpha, beta, gamma
/// and lambda each hold either a number or the word "estimate".
struct ScenarioConfig {
    std::string config_dir; // directory of the config file; anchors paths

    std::string distance_table;
    std::string population_table;
    std::string case_table;

    std::string alpha = "0.3";
    std::string beta = "0.16";
    std::string gamma = "0.0666666666666666666";
    std::string lambda = "estimate";

    double delta_a = 0.17; // clinical inputs behind beta/gamma = estimate
    double d_h = 5.2;
    double d_r = 15.0;

    int t0 = 1;
    int T = 30;
    double budget = 0.0;
    std::string a_max = "default"; // default = 1 - beta - gamma
    std::string mode = "screening";
    std::vector<std::string> strategies = {"network", "population", "infection_rate", "none"};
    std::string estimator = "trajectory";
    double fairness_delta = 0.0;
    std::string h0_source = "auto"; // auto | observed | forecast
    bool init_c_from_series = false;
    std::string out_dir = "out";

    est::SearchSpec search;
    int smoothing_window = 0;
    int estimation_window = 0; // trailing days used for fitting; 0 = all

    int fw_iterations = 200;
    double fw_rel_tol = 1e-8;
};

ScenarioConfig load_config(const std::string& path);

struct CliOptions {
    std::string out_dir;    // overrides the config when nonempty
    bool verify_lp = false; // cross-check every greedy LP against the simplex
};

/// Config with tables loaded, parameters fixed or estimated, the commute
/// network built and the initial hidden fractions resolved.
struct ResolvedScenario {
    ScenarioConfig raw;
    net::DistanceTable dist;
    Vec population;
    std::optional<epi::ObservedSeries> observations; // full series as given
    epi::DiseaseParams params;
    double lambda = 0.0;
    double a_max = 0.0;
    net::CommuteWeights weights;
    epi::Mode mode = epi::Mode::screening;
    Vec h0;
    std::string h0_source_used; // observed | forecast
    std::optional<est::EstimationResult> estimation;
    std::string out_dir;

    /// Key = value pairs embedded at the top of every output file.
    std::vector<std::pair<std::string, std::string>> echo() const;

    opt::SurrogateInstance instance() const;
    epi::CountyState initial_state() const;
    /// Newly confirmed counts of day t0-1: the observed row when the series
    /// has one, otherwise the counts implied by h0.
    Vec confirmed_before_start() const;
};

ResolvedScenario resolve_scenario(const ScenarioConfig& config, const CliOptions& options,
                                  bool need_h0);

struct StrategyOutcome {
    std::string name;
    epi::AllocationPlan plan;
    epi::Trace trace;
    Vec cumulative; // per-day total cumulative confirmed
    std::optional<opt::FrankWolfeResult> frank_wolfe;
};

StrategyOutcome run_strategy(const ResolvedScenario& scenario, const std::string& name,
                             bool verify_lp);

// Commands; each writes its files under the resolved output directory and
// returns the paths written.
std::vector<std::string> run_estimate(const ScenarioConfig& config, const CliOptions& options);
std::vector<std::string> run_allocate(const ScenarioConfig& config, const CliOptions& options);
std::vector<std::string> run_simulate(const ScenarioConfig& config, const CliOptions& options,
                                      const std::string& plan_path = "");
std::vector<std::string> run_compare(const ScenarioConfig& config, const CliOptions& options);

// Plan and trace files round-trip exactly: numbers are written in the
// shortest form that parses back to the same double.
void write_plan(const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& echo,
                const std::vector<std::string>& labels, const epi::AllocationPlan& plan);
epi::AllocationPlan read_plan(const std::string& path, std::vector<std::string>* labels = nullptr);

void write_trace(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& echo,
                 const std::vector<std::string>& labels, const epi::Trace& trace);
epi::Trace read_trace(const std::string& path);

} // namespace epialloc::cli

#endif
