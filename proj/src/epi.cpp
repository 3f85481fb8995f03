#include "epialloc/epi.hpp"

#include <algorithm>
#include <cmath>

#include "epialloc/error.hpp"
#include "epialloc/tabular.hpp"

namespace epialloc::epi {

namespace {

constexpr double kNegativeTol = 1e-12;

void clamp_nonnegative(Vec& v, const char* what) {
    for (double& x : v) {
        if (x < -kNegativeTol)
            fail(Errc::NegativeCompartment,
                 std::string(what) + " went negative: " + format_double(x));
        if (x < 0.0) x = 0.0;
    }
}

/// Shared day step. Screening passes v = 0, vaccination passes a = 0; the
/// update below covers both sets of flow equations.
StepResult step_impl(const CountyState& state, const DiseaseParams& params,
                     const net::CommuteWeights& w, const Vec& a, const Vec& v) {
    const std::size_t n = state.size();
    if (w.n != n || a.size() != n || v.size() != n)
        fail(Errc::DimensionMismatch, "step inputs disagree on county count");
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < 0.0 || v[i] < 0.0) fail(Errc::RateTooLarge, "negative intervention rate");
        if (params.beta + params.gamma + a[i] > 1.0)
            fail(Errc::RateTooLarge, "beta + gamma + a = " +
                                         format_double(params.beta + params.gamma + a[i]) +
                                         " exceeds 1 in county " + std::to_string(i));
    }

    Vec p = infection_prob(state.h, w, params.alpha);
    for (std::size_t i = 0; i < n; ++i)
        if (p[i] + v[i] > 1.0)
            fail(Errc::RateTooLarge, "infection probability plus vaccination rate " +
                                         format_double(p[i] + v[i]) + " exceeds 1 in county " +
                                         std::to_string(i));

    StepResult out;
    out.state.s.resize(n);
    out.state.h.resize(n);
    out.state.c.resize(n);
    out.state.r.resize(n);
    out.new_confirmed_fraction.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double infected = p[i] * state.s[i];
        double confirmed = (params.beta + a[i]) * state.h[i];
        double vaccinated = v[i] * state.s[i];
        out.state.s[i] = state.s[i] - infected - vaccinated;
        out.state.h[i] = state.h[i] + infected - confirmed - params.gamma * state.h[i];
        out.state.c[i] = state.c[i] + confirmed - params.gamma * state.c[i];
        out.state.r[i] = state.r[i] + params.gamma * (state.h[i] + state.c[i]) + vaccinated;
        out.new_confirmed_fraction[i] = confirmed;
    }
    clamp_nonnegative(out.state.s, "s");
    clamp_nonnegative(out.state.h, "h");
    clamp_nonnegative(out.state.c, "c");
    clamp_nonnegative(out.state.r, "r");
    return out;
}

} // namespace

void DiseaseParams::validate() const {
    if (!(alpha > 0.0) || alpha >= 1.0)
        fail(Errc::RateTooLarge, "alpha must lie in (0, 1), got " + format_double(alpha));
    if (!(beta > 0.0) || !(gamma > 0.0) || beta + gamma >= 1.0)
        fail(Errc::RateSumOverflow, "need beta > 0, gamma > 0 and beta + gamma < 1, got beta = " +
                                        format_double(beta) + ", gamma = " + format_double(gamma));
}

void CountyState::validate() const {
    const std::size_t n = s.size();
    if (h.size() != n || c.size() != n || r.size() != n)
        fail(Errc::DimensionMismatch, "compartment vectors disagree on county count");
    for (std::size_t i = 0; i < n; ++i)
        if (s[i] < 0.0 || h[i] < 0.0 || c[i] < 0.0 || r[i] < 0.0)
            fail(Errc::NegativeCompartment, "county " + std::to_string(i) +
                                                " has a negative compartment fraction");
}

const char* mode_name(Mode m) { return m == Mode::screening ? "screening" : "vaccination"; }

Mode parse_mode(const std::string& s) {
    if (s == "screening") return Mode::screening;
    if (s == "vaccination") return Mode::vaccination;
    fail(Errc::ParseError, "unknown mode '" + s + "'");
}

void AllocationPlan::validate(const Vec& population, double a_max) const {
    if (T < t0) fail(Errc::DimensionMismatch, "plan has T < t0");
    if (rates.rows() != days() || rates.cols() != population.size())
        fail(Errc::DimensionMismatch, "plan rate matrix is " + std::to_string(rates.rows()) +
                                          "x" + std::to_string(rates.cols()) + ", expected " +
                                          std::to_string(days()) + "x" +
                                          std::to_string(population.size()));
    if (budget < 0.0) fail(Errc::BudgetExceeded, "negative budget");
    const double box_slack = 1e-12 * std::max(1.0, a_max);
    for (std::size_t k = 0; k < rates.rows(); ++k) {
        double used = 0.0;
        for (std::size_t i = 0; i < rates.cols(); ++i) {
            double rate = rates(k, i);
            if (rate < 0.0)
                fail(Errc::RateTooLarge, "negative rate on day " + std::to_string(t0 + (int)k));
            if (rate > a_max + box_slack)
                fail(Errc::RateTooLarge, "rate " + format_double(rate) + " exceeds cap " +
                                             format_double(a_max) + " on day " +
                                             std::to_string(t0 + (int)k));
            used += population[i] * rate;
        }
        if (used > budget + 1e-9)
            fail(Errc::BudgetExceeded, "day " + std::to_string(t0 + (int)k) + " uses " +
                                           format_double(used) + " of budget " +
                                           format_double(budget));
    }
}

AllocationPlan zero_plan(std::size_t n, int t0, int T, double budget, Mode mode) {
    AllocationPlan plan;
    plan.t0 = t0;
    plan.T = T;
    plan.budget = budget;
    plan.mode = mode;
    plan.rates = Matrix(static_cast<std::size_t>(T - t0 + 1), n, 0.0);
    return plan;
}

Vec infection_prob(const Vec& hidden, const net::CommuteWeights& w, double alpha) {
    const std::size_t n = hidden.size();
    if (w.n != n) fail(Errc::DimensionMismatch, "hidden vector does not match network size");
    Vec p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double survive = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            double exposure = alpha * w.W(i, j) * hidden[j];
            if (exposure > 1.0)
                fail(Errc::ProbabilityOverflow,
                     "alpha * w * h = " + format_double(exposure) + " exceeds 1");
            survive *= 1.0 - exposure;
        }
        p[i] = 1.0 - survive;
    }
    return p;
}

StepResult step_screening(const CountyState& state, const DiseaseParams& params,
                          const net::CommuteWeights& w, const Vec& test_rates) {
    return step_impl(state, params, w, test_rates, Vec(state.size(), 0.0));
}

StepResult step_vaccine(const CountyState& state, const DiseaseParams& params,
                        const net::CommuteWeights& w, const Vec& vacc_rates) {
    return step_impl(state, params, w, Vec(state.size(), 0.0), vacc_rates);
}

Trace simulate(const CountyState& initial, const DiseaseParams& params,
               const net::CommuteWeights& w, const Vec& population, const AllocationPlan& plan) {
    params.validate();
    initial.validate();
    const std::size_t n = initial.size();
    if (population.size() != n || plan.rates.cols() != n)
        fail(Errc::DimensionMismatch, "simulate inputs disagree on county count");

    const std::size_t horizon = plan.days();
    Trace trace;
    trace.t0 = plan.t0;
    trace.T = plan.T;
    trace.states.reserve(horizon + 1);
    trace.states.push_back(initial);
    trace.new_confirmed = Matrix(horizon, n, 0.0);
    trace.applied_rates = plan.rates;

    const Vec zero(n, 0.0);
    for (std::size_t k = 0; k < horizon; ++k) {
        // Transition from day t0 - 1 + k to day t0 + k uses the rates of the
        // source day; the first source day (t0 - 1) predates the plan.
        const Vec rates = (k == 0) ? zero : plan.rates.row(k - 1);
        StepResult step = (plan.mode == Mode::screening)
                              ? step_screening(trace.states.back(), params, w, rates)
                              : step_vaccine(trace.states.back(), params, w, rates);
        for (std::size_t i = 0; i < n; ++i)
            trace.new_confirmed(k, i) = step.new_confirmed_fraction[i] * population[i];
        trace.states.push_back(std::move(step.state));
    }
    return trace;
}

Vec cumulative_confirmed(const Trace& trace) {
    Vec cum(trace.new_confirmed.rows(), 0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < trace.new_confirmed.rows(); ++k) {
        for (std::size_t i = 0; i < trace.new_confirmed.cols(); ++i)
            acc += trace.new_confirmed(k, i);
        cum[k] = acc;
    }
    return cum;
}

CountyState initial_state_from_observations(const ObservedSeries& obs, double beta,
                                            std::size_t t0_row, const Vec* cumulative_before) {
    if (!(beta > 0.0)) fail(Errc::ZeroBeta, "beta must be positive to invert confirmed counts");
    if (t0_row >= obs.days())
        fail(Errc::MissingRow, "case series has no row " + std::to_string(t0_row));
    const std::size_t n = obs.counties();
    if (obs.population.size() != n)
        fail(Errc::DimensionMismatch, "population vector does not match case series");
    if (cumulative_before != nullptr && cumulative_before->size() != n)
        fail(Errc::DimensionMismatch, "cumulative counts do not match case series");

    CountyState state;
    state.s.assign(n, 1.0);
    state.h.resize(n);
    state.c.assign(n, 0.0);
    state.r.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        state.h[i] = obs.new_confirmed(t0_row, i) / (beta * obs.population[i]);
        if (cumulative_before != nullptr) state.c[i] = (*cumulative_before)[i] / obs.population[i];
    }
    state.validate();
    return state;
}

AllocationPlan plan_by_population(const Vec& population, double budget, int t0, int T,
                                  double a_max) {
    double total = sum(population);
    if (!(total > 0.0)) fail(Errc::NonPositivePopulation, "total population must be positive");
    double rate = std::min(budget / total, a_max);
    AllocationPlan plan = zero_plan(population.size(), t0, T, budget, Mode::screening);
    for (std::size_t k = 0; k < plan.rates.rows(); ++k)
        for (std::size_t i = 0; i < plan.rates.cols(); ++i) plan.rates(k, i) = rate;
    return plan;
}

Vec plan_by_infection_rate(const Vec& prev_new_confirmed, const Vec& population, double budget,
                           double a_max) {
    const std::size_t n = population.size();
    if (prev_new_confirmed.size() != n)
        fail(Errc::DimensionMismatch, "confirmed counts do not match population vector");
    Vec per_capita(n, 0.0);
    double mass = 0.0; // sum of N_i * per_capita_i over active counties
    for (std::size_t i = 0; i < n; ++i) {
        if (prev_new_confirmed[i] < 0.0)
            fail(Errc::NegativeCompartment, "negative confirmed count");
        per_capita[i] = prev_new_confirmed[i] / population[i];
        mass += prev_new_confirmed[i];
    }

    if (mass == 0.0) {
        double total = sum(population);
        return Vec(n, std::min(budget / total, a_max));
    }

    Vec rates(n, 0.0);
    std::vector<bool> capped(n, false);
    double remaining = budget;
    // Scale proportionally; counties pinned at the cap drop out and the rest
    // absorb the excess, iterating until the scale is feasible.
    for (std::size_t pass = 0; pass < n; ++pass) {
        double active_mass = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!capped[i] && per_capita[i] > 0.0) active_mass += population[i] * per_capita[i];
        if (active_mass <= 0.0) break;
        double scale = remaining / active_mass;
        bool newly_capped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (capped[i] || per_capita[i] <= 0.0) continue;
            if (scale * per_capita[i] > a_max) {
                rates[i] = a_max;
                capped[i] = true;
                remaining -= population[i] * a_max;
                newly_capped = true;
            }
        }
        if (!newly_capped) {
            for (std::size_t i = 0; i < n; ++i)
                if (!capped[i] && per_capita[i] > 0.0) rates[i] = scale * per_capita[i];
            break;
        }
    }
    return rates;
}

ObservedSeries load_case_series(const std::string& path, const Vec& population,
                                const std::vector<std::string>& county_labels) {
    Table t = read_table(path);
    if (t.rows.size() < 2) fail(Errc::ParseError, path + ": need a header row and data rows");
    const auto& header = t.rows[0];
    if (header.size() < 2) fail(Errc::ParseError, path + ": header too short");
    const std::size_t n = header.size() - 1;
    if (!county_labels.empty()) {
        if (county_labels.size() != n)
            fail(Errc::LabelMismatch, path + ": " + std::to_string(n) +
                                          " case columns, expected " +
                                          std::to_string(county_labels.size()));
        for (std::size_t i = 0; i < n; ++i)
            if (header[i + 1] != county_labels[i])
                fail(Errc::LabelMismatch, path + ": column '" + header[i + 1] +
                                              "' does not match county '" + county_labels[i] +
                                              "'");
    }
    if (population.size() != n)
        fail(Errc::DimensionMismatch, path + ": population vector does not match case columns");

    ObservedSeries obs;
    obs.population = population;
    obs.county_labels.assign(header.begin() + 1, header.end());
    obs.new_confirmed = Matrix(t.rows.size() - 1, n, 0.0);
    for (std::size_t r = 1; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != n + 1)
            fail(Errc::ParseError, path + ": row " + std::to_string(r + 1) + " has " +
                                       std::to_string(row.size()) + " cells, expected " +
                                       std::to_string(n + 1));
        obs.day_labels.push_back(row[0]);
        for (std::size_t i = 0; i < n; ++i) {
            double v = parse_double(row[i + 1], path + " day " + row[0]);
            if (v < 0.0) fail(Errc::ParseError, path + ": negative case count on day " + row[0]);
            obs.new_confirmed(r - 1, i) = v;
        }
    }
    return obs;
}

} // namespace epialloc::epi
