#include "epialloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "epialloc/error.hpp"
#include "epialloc/tabular.hpp"

namespace fs = std::filesystem;

namespace epialloc::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

std::string anchor_path(const std::string& dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute() || dir.empty()) return path;
    return (fs::path(dir) / p).string();
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    fail(Errc::ParseError, "config key " + key + ": expected a boolean, got '" + v + "'");
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ",";
        out += items[i];
    }
    return out;
}

/// "estimate" markers aside, parameter values must be plain numbers.
bool wants_estimate(const std::string& v) { return v == "estimate"; }

double parse_param(const std::string& v, const std::string& key) {
    return parse_double(v, "config key " + key);
}

std::string out_file(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    return (fs::path(dir) / name).string();
}

void append_echo(std::string& text,
                 const std::vector<std::pair<std::string, std::string>>& echo) {
    for (const auto& [key, value] : echo) text += "# " + key + " = " + value + "\n";
}

epi::ObservedSeries pre_intervention_window(const epi::ObservedSeries& obs, int t0) {
    // Rows are days 1 .. m; the pre-intervention period is days 1 .. t0-1.
    epi::ObservedSeries out;
    out.population = obs.population;
    out.county_labels = obs.county_labels;
    std::size_t rows = std::min(obs.days(), static_cast<std::size_t>(std::max(0, t0 - 1)));
    out.new_confirmed = Matrix(rows, obs.counties(), 0.0);
    for (std::size_t t = 0; t < rows; ++t) {
        out.new_confirmed.set_row(t, obs.new_confirmed.row(t));
        if (t < obs.day_labels.size()) out.day_labels.push_back(obs.day_labels[t]);
    }
    return out;
}

} // namespace

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ParseError, "cannot open config: " + path);
    ScenarioConfig c;
    c.config_dir = fs::path(path).parent_path().string();

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            fail(Errc::ParseError,
                 path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        const std::string ctx = "config key " + key;

        if (key == "distance_table") c.distance_table = value;
        else if (key == "population_table") c.population_table = value;
        else if (key == "case_table") c.case_table = value;
        else if (key == "alpha") c.alpha = value;
        else if (key == "beta") c.beta = value;
        else if (key == "gamma") c.gamma = value;
        else if (key == "lambda") c.lambda = value;
        else if (key == "delta_a") c.delta_a = parse_double(value, ctx);
        else if (key == "d_h") c.d_h = parse_double(value, ctx);
        else if (key == "d_r") c.d_r = parse_double(value, ctx);
        else if (key == "t0") c.t0 = static_cast<int>(parse_int(value, ctx));
        else if (key == "T") c.T = static_cast<int>(parse_int(value, ctx));
        else if (key == "budget") c.budget = parse_double(value, ctx);
        else if (key == "a_max") c.a_max = value;
        else if (key == "mode") c.mode = value;
        else if (key == "strategies") c.strategies = split_list(value);
        else if (key == "estimator") c.estimator = value;
        else if (key == "fairness_delta") c.fairness_delta = parse_double(value, ctx);
        else if (key == "h0_source") c.h0_source = value;
        else if (key == "init_c_from_series") c.init_c_from_series = parse_bool(value, key);
        else if (key == "out_dir") c.out_dir = value;
        else if (key == "alpha_min") c.search.alpha_min = parse_double(value, ctx);
        else if (key == "alpha_max") c.search.alpha_max = parse_double(value, ctx);
        else if (key == "lambda_min") c.search.lambda_min = parse_double(value, ctx);
        else if (key == "lambda_max")
            c.search.lambda_max = (value == "auto") ? -1.0 : parse_double(value, ctx);
        else if (key == "grid_size") c.search.grid_size = static_cast<int>(parse_int(value, ctx));
        else if (key == "refinement_rounds")
            c.search.refinement_rounds = static_cast<int>(parse_int(value, ctx));
        else if (key == "smoothing_window")
            c.smoothing_window = static_cast<int>(parse_int(value, ctx));
        else if (key == "estimation_window")
            c.estimation_window = static_cast<int>(parse_int(value, ctx));
        else if (key == "fw_iterations")
            c.fw_iterations = static_cast<int>(parse_int(value, ctx));
        else if (key == "fw_rel_tol") c.fw_rel_tol = parse_double(value, ctx);
        else
            fail(Errc::ParseError,
                 path + ":" + std::to_string(lineno) + ": unknown config key '" + key + "'");
    }

    if (c.t0 > c.T) fail(Errc::ParseError, path + ": needs t0 <= T");
    if (c.strategies.empty()) fail(Errc::ParseError, path + ": strategies must be non-empty");
    static const std::set<std::string> known = {"network", "population", "infection_rate",
                                                "none"};
    for (const auto& s : c.strategies)
        if (!known.count(s)) fail(Errc::ParseError, path + ": unknown strategy '" + s + "'");
    return c;
}

std::vector<std::pair<std::string, std::string>> ResolvedScenario::echo() const {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("config.distance_table", raw.distance_table);
    e.emplace_back("config.population_table", raw.population_table);
    e.emplace_back("config.case_table", raw.case_table);
    e.emplace_back("config.alpha", format_double(params.alpha));
    e.emplace_back("config.beta", format_double(params.beta));
    e.emplace_back("config.gamma", format_double(params.gamma));
    e.emplace_back("config.lambda", format_double(lambda));
    e.emplace_back("config.t0", std::to_string(raw.t0));
    e.emplace_back("config.T", std::to_string(raw.T));
    e.emplace_back("config.budget", format_double(raw.budget));
    e.emplace_back("config.a_max", format_double(a_max));
    e.emplace_back("config.mode", epi::mode_name(mode));
    e.emplace_back("config.strategies", join(raw.strategies));
    e.emplace_back("config.estimator", raw.estimator);
    e.emplace_back("config.fairness_delta", format_double(raw.fairness_delta));
    e.emplace_back("config.h0_source", h0_source_used);
    e.emplace_back("config.smoothing_window", std::to_string(raw.smoothing_window));
    e.emplace_back("config.estimation_window", std::to_string(raw.estimation_window));
    e.emplace_back("config.fw_iterations", std::to_string(raw.fw_iterations));
    e.emplace_back("config.fw_rel_tol", format_double(raw.fw_rel_tol));
    if (estimation.has_value()) {
        e.emplace_back("estimate.alpha", format_double(estimation->alpha_hat));
        e.emplace_back("estimate.lambda", format_double(estimation->lambda_hat));
        e.emplace_back("estimate.objective", format_double(estimation->objective_value));
    }
    if (h0_source_used != "none")
        for (std::size_t i = 0; i < h0.size(); ++i)
            e.emplace_back("h0." + dist.labels[i], format_double(h0[i]));
    return e;
}

opt::SurrogateInstance ResolvedScenario::instance() const {
    opt::SurrogateInstance inst;
    inst.params = params;
    inst.W = weights;
    inst.N = population;
    inst.h0 = h0;
    inst.t0 = raw.t0;
    inst.T = raw.T;
    inst.budget = raw.budget;
    inst.a_max = a_max;
    inst.mode = mode;
    inst.fairness_delta = raw.fairness_delta;
    return inst;
}

epi::CountyState ResolvedScenario::initial_state() const {
    epi::CountyState state;
    state.s.assign(h0.size(), 1.0);
    state.h = h0;
    state.c.assign(h0.size(), 0.0);
    state.r.assign(h0.size(), 0.0);
    if (raw.init_c_from_series && observations.has_value()) {
        std::size_t rows =
            std::min(observations->days(), static_cast<std::size_t>(std::max(0, raw.t0 - 1)));
        for (std::size_t t = 0; t < rows; ++t)
            for (std::size_t i = 0; i < h0.size(); ++i)
                state.c[i] += observations->new_confirmed(t, i) / population[i];
    }
    return state;
}

Vec ResolvedScenario::confirmed_before_start() const {
    if (observations.has_value() && raw.t0 >= 2 &&
        observations->days() >= static_cast<std::size_t>(raw.t0 - 1))
        return observations->new_confirmed.row(static_cast<std::size_t>(raw.t0 - 2));
    Vec counts(h0.size(), 0.0);
    for (std::size_t i = 0; i < h0.size(); ++i)
        counts[i] = params.beta * population[i] * h0[i];
    return counts;
}

ResolvedScenario resolve_scenario(const ScenarioConfig& config, const CliOptions& options,
                                  bool need_h0) {
    ResolvedScenario r;
    r.raw = config;
    r.out_dir = options.out_dir.empty()
                    ? anchor_path(config.config_dir, config.out_dir)
                    : options.out_dir;

    if (config.distance_table.empty() || config.population_table.empty())
        fail(Errc::ParseError, "config needs distance_table and population_table");
    r.dist = net::load_distance_table(anchor_path(config.config_dir, config.distance_table));
    auto counts = net::load_population_table(
        anchor_path(config.config_dir, config.population_table), &r.dist);
    r.population.assign(counts.begin(), counts.end());

    if (!config.case_table.empty()) {
        r.observations = epi::load_case_series(anchor_path(config.config_dir, config.case_table),
                                               r.population, r.dist.labels);
        if (config.smoothing_window > 1)
            r.observations->new_confirmed =
                est::smooth_series(r.observations->new_confirmed, config.smoothing_window);
    }

    // beta and gamma: fixed numbers or the clinical-records estimate.
    if (wants_estimate(config.beta) || wants_estimate(config.gamma)) {
        est::ClinicalRates rates =
            est::clinical_rates({config.delta_a, config.d_h, config.d_r});
        r.params.beta = wants_estimate(config.beta) ? rates.beta : parse_param(config.beta, "beta");
        r.params.gamma =
            wants_estimate(config.gamma) ? rates.gamma : parse_param(config.gamma, "gamma");
    } else {
        r.params.beta = parse_param(config.beta, "beta");
        r.params.gamma = parse_param(config.gamma, "gamma");
    }

    // alpha and lambda: fixed numbers or fitted to the pre-intervention window.
    bool fit_needed = wants_estimate(config.alpha) || wants_estimate(config.lambda);
    if (fit_needed) {
        if (!r.observations.has_value())
            fail(Errc::ParseError, "alpha/lambda = estimate needs a case_table");
        epi::ObservedSeries window = pre_intervention_window(*r.observations, config.t0);
        window = est::trailing_window(window, config.estimation_window);
        est::EstimationResult fit =
            (est::parse_estimator(config.estimator) == est::EstimatorId::loglinear)
                ? est::fit_alpha_lambda_loglinear(window, r.params.beta, r.params.gamma, r.dist,
                                                  config.search)
                : est::fit_alpha_lambda_trajectory(window, r.params.beta, r.params.gamma, r.dist,
                                                   config.search);
        r.estimation = fit;
        r.params.alpha =
            wants_estimate(config.alpha) ? fit.alpha_hat : parse_param(config.alpha, "alpha");
        r.lambda =
            wants_estimate(config.lambda) ? fit.lambda_hat : parse_param(config.lambda, "lambda");
    } else {
        r.params.alpha = parse_param(config.alpha, "alpha");
        r.lambda = parse_param(config.lambda, "lambda");
    }
    r.params.validate();
    r.weights = net::build_weights(r.dist, r.lambda);

    r.a_max = (config.a_max == "default") ? r.params.default_rate_cap()
                                          : parse_param(config.a_max, "a_max");
    if (r.params.beta + r.params.gamma + r.a_max > 1.0)
        fail(Errc::RateTooLarge, "beta + gamma + a_max = " +
                                     format_double(r.params.beta + r.params.gamma + r.a_max) +
                                     " exceeds 1");
    r.mode = epi::parse_mode(config.mode);

    if (need_h0) {
        bool can_observe = r.observations.has_value() &&
                           r.observations->days() >= static_cast<std::size_t>(config.t0);
        std::string source = config.h0_source;
        if (source == "auto") source = can_observe ? "observed" : "forecast";
        if (source == "observed") {
            if (!can_observe)
                fail(Errc::MissingRow, "case series has no row for day " +
                                           std::to_string(config.t0));
            r.h0 = epi::initial_state_from_observations(
                       *r.observations, r.params.beta,
                       static_cast<std::size_t>(config.t0 - 1))
                       .h;
        } else if (source == "forecast") {
            if (!r.observations.has_value())
                fail(Errc::ParseError, "h0_source = forecast needs a case_table");
            epi::ObservedSeries window = pre_intervention_window(*r.observations, config.t0);
            window = est::trailing_window(window, config.estimation_window);
            est::HiddenSeries hidden = est::hidden_from_confirmed(window, r.params.beta);
            r.h0 = est::estimate_h0(hidden.h, r.params.alpha, r.lambda, r.params.beta,
                                    r.params.gamma, r.dist);
        } else {
            fail(Errc::ParseError, "unknown h0_source '" + source + "'");
        }
        r.h0_source_used = source;
    } else {
        r.h0.assign(r.population.size(), 0.0);
        r.h0_source_used = "none";
    }
    return r;
}

StrategyOutcome run_strategy(const ResolvedScenario& scenario, const std::string& name,
                             bool verify_lp) {
    const Vec& population = scenario.population;
    const std::size_t n = population.size();
    const int t0 = scenario.raw.t0;
    const int T = scenario.raw.T;
    epi::CountyState initial = scenario.initial_state();

    StrategyOutcome out;
    out.name = name;
    if (name == "none") {
        out.plan = epi::zero_plan(n, t0, T, scenario.raw.budget, scenario.mode);
        out.trace = epi::simulate(initial, scenario.params, scenario.weights, population,
                                  out.plan);
    } else if (name == "population") {
        out.plan = epi::plan_by_population(population, scenario.raw.budget, t0, T,
                                           scenario.a_max);
        out.plan.mode = scenario.mode;
        out.trace = epi::simulate(initial, scenario.params, scenario.weights, population,
                                  out.plan);
    } else if (name == "network") {
        opt::SurrogateInstance inst = scenario.instance();
        opt::FrankWolfeOptions options;
        options.iterations = scenario.raw.fw_iterations;
        options.rel_tol = scenario.raw.fw_rel_tol;
        options.verify_lp = verify_lp;
        out.frank_wolfe = opt::frank_wolfe(inst, opt::initial_plan(inst), options);
        out.plan = out.frank_wolfe->plan;
        out.trace = epi::simulate(initial, scenario.params, scenario.weights, population,
                                  out.plan);
    } else if (name == "infection_rate") {
        // Rates follow yesterday's simulated confirmed counts, so the plan is
        // built while stepping.
        out.plan = epi::zero_plan(n, t0, T, scenario.raw.budget, scenario.mode);
        const std::size_t horizon = out.plan.days();
        epi::Trace trace;
        trace.t0 = t0;
        trace.T = T;
        trace.states.push_back(initial);
        trace.new_confirmed = Matrix(horizon, n, 0.0);
        const Vec zero(n, 0.0);
        for (std::size_t k = 0; k < horizon; ++k) {
            Vec rates = zero;
            if (k > 0) {
                Vec prev = (k == 1) ? scenario.confirmed_before_start()
                                    : trace.new_confirmed.row(k - 2);
                rates = epi::plan_by_infection_rate(prev, population, scenario.raw.budget,
                                                    scenario.a_max);
                out.plan.rates.set_row(k - 1, rates);
            }
            epi::StepResult step =
                (scenario.mode == epi::Mode::screening)
                    ? epi::step_screening(trace.states.back(), scenario.params,
                                          scenario.weights, rates)
                    : epi::step_vaccine(trace.states.back(), scenario.params, scenario.weights,
                                        rates);
            for (std::size_t i = 0; i < n; ++i)
                trace.new_confirmed(k, i) = step.new_confirmed_fraction[i] * population[i];
            trace.states.push_back(std::move(step.state));
        }
        // Day T gets the same rule for completeness; it acts past the horizon.
        Vec prev = (horizon >= 2) ? trace.new_confirmed.row(horizon - 2)
                                  : scenario.confirmed_before_start();
        out.plan.rates.set_row(horizon - 1,
                               epi::plan_by_infection_rate(prev, population,
                                                           scenario.raw.budget, scenario.a_max));
        trace.applied_rates = out.plan.rates;
        out.trace = std::move(trace);
    } else {
        fail(Errc::ParseError, "unknown strategy '" + name + "'");
    }
    out.plan.validate(population, scenario.a_max);
    out.cumulative = epi::cumulative_confirmed(out.trace);
    return out;
}

void write_plan(const std::string& path,
                const std::vector<std::pair<std::string, std::string>>& echo,
                const std::vector<std::string>& labels, const epi::AllocationPlan& plan) {
    std::string text;
    append_echo(text, echo);
    text += "# plan.t0 = " + std::to_string(plan.t0) + "\n";
    text += "# plan.T = " + std::to_string(plan.T) + "\n";
    text += "# plan.budget = " + format_double(plan.budget) + "\n";
    text += "# plan.mode = " + std::string(epi::mode_name(plan.mode)) + "\n";
    text += "day";
    for (const auto& label : labels) text += "," + label;
    text += "\n";
    for (std::size_t k = 0; k < plan.rates.rows(); ++k) {
        text += std::to_string(plan.t0 + static_cast<int>(k));
        for (std::size_t i = 0; i < plan.rates.cols(); ++i)
            text += "," + format_double(plan.rates(k, i));
        text += "\n";
    }
    write_file(path, text);
}

epi::AllocationPlan read_plan(const std::string& path, std::vector<std::string>* labels) {
    Table t = read_table(path);
    epi::AllocationPlan plan;
    bool have_t0 = false, have_T = false, have_mode = false;
    for (const std::string& c : t.comments) {
        std::size_t eq = c.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(c.substr(0, eq));
        std::string value = trim(c.substr(eq + 1));
        if (key == "plan.t0") plan.t0 = static_cast<int>(parse_int(value, path)), have_t0 = true;
        else if (key == "plan.T") plan.T = static_cast<int>(parse_int(value, path)), have_T = true;
        else if (key == "plan.budget") plan.budget = parse_double(value, path);
        else if (key == "plan.mode") plan.mode = epi::parse_mode(value), have_mode = true;
    }
    if (!have_t0 || !have_T || !have_mode)
        fail(Errc::ParseError, path + ": missing plan.t0/plan.T/plan.mode echo lines");
    if (t.rows.size() < 2) fail(Errc::ParseError, path + ": no plan rows");
    const std::size_t n = t.rows[0].size() - 1;
    if (labels != nullptr) labels->assign(t.rows[0].begin() + 1, t.rows[0].end());
    if (t.rows.size() - 1 != static_cast<std::size_t>(plan.T - plan.t0 + 1))
        fail(Errc::DimensionMismatch, path + ": day rows do not cover t0..T");
    plan.rates = Matrix(t.rows.size() - 1, n, 0.0);
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
        if (t.rows[k].size() != n + 1)
            fail(Errc::ParseError, path + ": ragged plan row " + std::to_string(k));
        for (std::size_t i = 0; i < n; ++i)
            plan.rates(k - 1, i) = parse_double(t.rows[k][i + 1], path);
    }
    return plan;
}

void write_trace(const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& echo,
                 const std::vector<std::string>& labels, const epi::Trace& trace) {
    std::string text;
    append_echo(text, echo);
    text += "# trace.t0 = " + std::to_string(trace.t0) + "\n";
    text += "# trace.T = " + std::to_string(trace.T) + "\n";
    text += "day,county,s,h,c,r,new_confirmed,allocated_rate\n";
    const std::size_t n = labels.size();
    for (std::size_t k = 0; k < trace.states.size(); ++k) {
        int day = trace.t0 - 1 + static_cast<int>(k);
        const epi::CountyState& state = trace.states[k];
        for (std::size_t i = 0; i < n; ++i) {
            text += std::to_string(day) + "," + labels[i];
            text += "," + format_double(state.s[i]);
            text += "," + format_double(state.h[i]);
            text += "," + format_double(state.c[i]);
            text += "," + format_double(state.r[i]);
            double confirmed = (k == 0) ? 0.0 : trace.new_confirmed(k - 1, i);
            double rate = (k == 0) ? 0.0 : trace.applied_rates(k - 1, i);
            text += "," + format_double(confirmed);
            text += "," + format_double(rate);
            text += "\n";
        }
    }
    write_file(path, text);
}

epi::Trace read_trace(const std::string& path) {
    Table t = read_table(path);
    epi::Trace trace;
    bool have_t0 = false, have_T = false;
    for (const std::string& c : t.comments) {
        std::size_t eq = c.find('=');
        if (eq == std::string::npos) continue;
        std::string key = trim(c.substr(0, eq));
        std::string value = trim(c.substr(eq + 1));
        if (key == "trace.t0") trace.t0 = static_cast<int>(parse_int(value, path)), have_t0 = true;
        else if (key == "trace.T") trace.T = static_cast<int>(parse_int(value, path)), have_T = true;
    }
    if (!have_t0 || !have_T) fail(Errc::ParseError, path + ": missing trace.t0/trace.T echo");
    if (t.rows.size() < 2) fail(Errc::ParseError, path + ": no trace rows");

    const std::size_t days = static_cast<std::size_t>(trace.T - trace.t0 + 2);
    const std::size_t body = t.rows.size() - 1;
    if (body % days != 0)
        fail(Errc::DimensionMismatch, path + ": row count does not fit the horizon");
    const std::size_t n = body / days;
    trace.states.assign(days, epi::CountyState{Vec(n), Vec(n), Vec(n), Vec(n)});
    trace.new_confirmed = Matrix(days - 1, n, 0.0);
    trace.applied_rates = Matrix(days - 1, n, 0.0);
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != 8) fail(Errc::ParseError, path + ": trace rows need 8 columns");
        std::size_t flat = r - 1;
        std::size_t k = flat / n;
        std::size_t i = flat % n;
        trace.states[k].s[i] = parse_double(row[2], path);
        trace.states[k].h[i] = parse_double(row[3], path);
        trace.states[k].c[i] = parse_double(row[4], path);
        trace.states[k].r[i] = parse_double(row[5], path);
        if (k > 0) {
            trace.new_confirmed(k - 1, i) = parse_double(row[6], path);
            trace.applied_rates(k - 1, i) = parse_double(row[7], path);
        }
    }
    return trace;
}

std::vector<std::string> run_estimate(const ScenarioConfig& config, const CliOptions& options) {
    ResolvedScenario base = resolve_scenario(config, options, false);
    if (!base.observations.has_value())
        fail(Errc::ParseError, "estimate needs a case_table");

    epi::ObservedSeries window = pre_intervention_window(*base.observations, config.t0);
    window = est::trailing_window(window, config.estimation_window);
    est::EstimationResult fit =
        (est::parse_estimator(config.estimator) == est::EstimatorId::loglinear)
            ? est::fit_alpha_lambda_loglinear(window, base.params.beta, base.params.gamma,
                                              base.dist, config.search)
            : est::fit_alpha_lambda_trajectory(window, base.params.beta, base.params.gamma,
                                               base.dist, config.search);
    est::HiddenSeries hidden = est::hidden_from_confirmed(window, base.params.beta);
    Vec h0 = est::estimate_h0(hidden.h, fit.alpha_hat, fit.lambda_hat, base.params.beta,
                              base.params.gamma, base.dist);

    std::string text;
    text += "# command = estimate\n";
    append_echo(text, base.echo());
    text += "beta = " + format_double(base.params.beta) + "\n";
    text += "gamma = " + format_double(base.params.gamma) + "\n";
    text += "alpha_hat = " + format_double(fit.alpha_hat) + "\n";
    text += "lambda_hat = " + format_double(fit.lambda_hat) + "\n";
    text += "objective = " + format_double(fit.objective_value) + "\n";
    text += "estimator = " + std::string(est::estimator_name(fit.estimator_id)) + "\n";
    text += "window_days = " + std::to_string(window.days()) + "\n";
    text += "alpha_bounds = " + format_double(fit.diagnostics.alpha_lo) + " " +
            format_double(fit.diagnostics.alpha_hi) + "\n";
    text += "lambda_bounds = " + format_double(fit.diagnostics.lambda_lo) + " " +
            format_double(fit.diagnostics.lambda_hi) + "\n";
    text += "grid_size = " + std::to_string(fit.diagnostics.grid_size) + "\n";
    text += "refinement_rounds = " + std::to_string(fit.diagnostics.refinement_rounds) + "\n";
    text += "evaluations = " + std::to_string(fit.diagnostics.evaluations) + "\n";
    text += "dropped_cells = " + std::to_string(fit.diagnostics.dropped_cells) + "\n";
    text += "max_hidden = " + format_double(fit.diagnostics.max_hidden) + "\n";
    text += "hidden_above_one = " + std::string(fit.diagnostics.hidden_above_one ? "1" : "0") +
            "\n";
    text += "high_hidden_warning = " +
            std::string(fit.diagnostics.high_hidden_warning ? "1" : "0") + "\n";
    for (std::size_t i = 0; i < h0.size(); ++i)
        text += "h0." + base.dist.labels[i] + " = " + format_double(h0[i]) + "\n";

    std::string path = out_file(base.out_dir, "estimate.txt");
    write_file(path, text);
    return {path};
}

std::vector<std::string> run_allocate(const ScenarioConfig& config, const CliOptions& options) {
    ResolvedScenario scenario = resolve_scenario(config, options, true);
    if (scenario.raw.budget < 0.0) fail(Errc::BudgetExceeded, "negative budget");

    opt::SurrogateInstance inst = scenario.instance();
    opt::FrankWolfeOptions fw_options;
    fw_options.iterations = config.fw_iterations;
    fw_options.rel_tol = config.fw_rel_tol;
    fw_options.verify_lp = options.verify_lp;
    opt::FrankWolfeResult result = opt::frank_wolfe(inst, opt::initial_plan(inst), fw_options);
    result.plan.validate(scenario.population, scenario.a_max);

    auto echo = scenario.echo();
    echo.emplace_back("frank_wolfe.objective", format_double(result.objective));
    echo.emplace_back("frank_wolfe.initial_objective",
                      format_double(result.initial_objective));
    echo.emplace_back("frank_wolfe.iterations", std::to_string(result.iterations));
    echo.emplace_back("frank_wolfe.stalled", result.stalled ? "1" : "0");
    echo.emplace_back("frank_wolfe.lp_discrepancies",
                      std::to_string(result.lp_discrepancies));

    std::string plan_path = out_file(scenario.out_dir, "plan_network.csv");
    write_plan(plan_path, echo, scenario.dist.labels, result.plan);

    std::string log_text = "iteration,objective,step_norm,median_support,max_support\n";
    for (const auto& stat : result.log) {
        std::vector<std::size_t> support = stat.day_support;
        std::sort(support.begin(), support.end());
        std::size_t median = support.empty() ? 0 : support[support.size() / 2];
        std::size_t peak = support.empty() ? 0 : support.back();
        log_text += std::to_string(stat.iteration) + "," + format_double(stat.objective) + "," +
                    format_double(stat.step_norm) + "," + std::to_string(median) + "," +
                    std::to_string(peak) + "\n";
    }
    std::string log_path = out_file(scenario.out_dir, "fw_iterations.csv");
    write_file(log_path, log_text);
    return {plan_path, log_path};
}

std::vector<std::string> run_simulate(const ScenarioConfig& config, const CliOptions& options,
                                      const std::string& plan_path) {
    ResolvedScenario scenario = resolve_scenario(config, options, true);
    epi::AllocationPlan plan;
    if (plan_path.empty()) {
        plan = epi::zero_plan(scenario.population.size(), config.t0, config.T, config.budget,
                              scenario.mode);
    } else {
        plan = read_plan(plan_path);
        if (plan.rates.cols() != scenario.population.size())
            fail(Errc::DimensionMismatch,
                 plan_path + ": plan has " + std::to_string(plan.rates.cols()) +
                     " counties, scenario has " + std::to_string(scenario.population.size()));
        if (plan.t0 != config.t0 || plan.T != config.T)
            fail(Errc::DimensionMismatch, plan_path + ": plan horizon does not match scenario");
    }
    plan.validate(scenario.population, scenario.a_max);

    epi::Trace trace = epi::simulate(scenario.initial_state(), scenario.params, scenario.weights,
                                     scenario.population, plan);
    std::string path = out_file(scenario.out_dir, "trace.csv");
    write_trace(path, scenario.echo(), scenario.dist.labels, trace);
    return {path};
}

std::vector<std::string> run_compare(const ScenarioConfig& config, const CliOptions& options) {
    ResolvedScenario scenario = resolve_scenario(config, options, true);
    std::vector<StrategyOutcome> outcomes;
    for (const std::string& name : config.strategies)
        outcomes.push_back(run_strategy(scenario, name, options.verify_lp));

    auto echo = scenario.echo();
    std::vector<std::string> written;

    // Per-day cumulative confirmed per strategy.
    std::string cum_text;
    append_echo(cum_text, echo);
    cum_text += "day";
    for (const auto& o : outcomes) cum_text += "," + o.name;
    cum_text += "\n";
    const std::size_t horizon = static_cast<std::size_t>(config.T - config.t0 + 1);
    for (std::size_t k = 0; k < horizon; ++k) {
        cum_text += std::to_string(config.t0 + static_cast<int>(k));
        for (const auto& o : outcomes) cum_text += "," + format_double(o.cumulative[k]);
        cum_text += "\n";
    }
    std::string cum_path = out_file(scenario.out_dir, "report_cumulative.csv");
    write_file(cum_path, cum_text);
    written.push_back(cum_path);

    // Per-county cumulative confirmed at day T.
    std::string county_text;
    append_echo(county_text, echo);
    county_text += "county";
    for (const auto& o : outcomes) county_text += "," + o.name;
    county_text += "\n";
    for (std::size_t i = 0; i < scenario.population.size(); ++i) {
        county_text += scenario.dist.labels[i];
        for (const auto& o : outcomes) {
            double total = 0.0;
            for (std::size_t k = 0; k < o.trace.new_confirmed.rows(); ++k)
                total += o.trace.new_confirmed(k, i);
            county_text += "," + format_double(total);
        }
        county_text += "\n";
    }
    std::string county_path = out_file(scenario.out_dir, "report_counties.csv");
    write_file(county_path, county_text);
    written.push_back(county_path);

    for (const auto& o : outcomes) {
        if (o.name != "network") continue;
        std::string alloc_text;
        append_echo(alloc_text, echo);
        alloc_text += "day,county,rate\n";
        for (std::size_t k = 0; k < o.plan.rates.rows(); ++k)
            for (std::size_t i = 0; i < o.plan.rates.cols(); ++i)
                if (o.plan.rates(k, i) != 0.0)
                    alloc_text += std::to_string(config.t0 + static_cast<int>(k)) + "," +
                                  scenario.dist.labels[i] + "," +
                                  format_double(o.plan.rates(k, i)) + "\n";
        std::string alloc_path = out_file(scenario.out_dir, "allocation_network.csv");
        write_file(alloc_path, alloc_text);
        written.push_back(alloc_path);

        std::string plan_path = out_file(scenario.out_dir, "plan_network.csv");
        write_plan(plan_path, echo, scenario.dist.labels, o.plan);
        written.push_back(plan_path);
    }
    return written;
}

} // namespace epialloc::cli
