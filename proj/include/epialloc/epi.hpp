#ifndef EPIALLOC_EPI_HPP
#define EPIALLOC_EPI_HPP

#include <string>
#include <vector>

#include "epialloc/linalg.hpp"
#include "epialloc/net.hpp"

namespace epialloc::epi {

/// Daily rates of the disease model. beta + gamma must stay below 1 so the
/// one-day hidden-compartment update keeps a nonnegative coefficient, and
/// alpha below 1 for the infection-probability bound to hold.
struct DiseaseParams {
    double alpha; // infection rate per day
    double beta;  // diagnosis rate per day (without screening)
    double gamma; // recovery rate per day

    void validate() const;
    double default_rate_cap() const { return 1.0 - beta - gamma; }
};

/// Per-county compartment fractions at one time step. The per-county sum
/// s+h+c+r is preserved by every step; it is not forced to equal 1 (initial
/// states built from observations can slightly exceed it).
struct CountyState {
    Vec s, h, c, r;

    std::size_t size() const { return s.size(); }
    void validate() const;
};

enum class Mode { screening, vaccination };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

/// Per-day, per-county intervention rates over days t0..T, with a shared
/// daily budget cap of M tests (or doses).
struct AllocationPlan {
    int t0 = 0;
    int T = 0;
    Matrix rates; // (T - t0 + 1) x n, row k = day t0 + k
    double budget = 0.0;
    Mode mode = Mode::screening;

    std::size_t days() const { return static_cast<std::size_t>(T - t0 + 1); }
    std::size_t counties() const { return rates.cols(); }

    /// Box and budget feasibility: 0 <= rate <= a_max (tiny rounding slack)
    /// and sum_i N_i * rate[t][i] <= M + 1e-9 for every day.
    void validate(const Vec& population, double a_max) const;
};

AllocationPlan zero_plan(std::size_t n, int t0, int T, double budget, Mode mode);

/// One simulated outbreak: states for days t0-1 .. T plus the newly
/// confirmed counts and the applied intervention rates for days t0 .. T.
struct Trace {
    int t0 = 0;
    int T = 0;
    std::vector<CountyState> states; // index k = day t0 - 1 + k
    Matrix new_confirmed;            // (T - t0 + 1) x n counts, row k = day t0 + k
    Matrix applied_rates;            // same shape; the plan rates by day
};

/// Observed inputs: county populations and the day x county matrix of newly
/// confirmed case counts.
struct ObservedSeries {
    Vec population;
    Matrix new_confirmed;
    std::vector<std::string> day_labels;
    std::vector<std::string> county_labels;

    std::size_t days() const { return new_confirmed.rows(); }
    std::size_t counties() const { return new_confirmed.cols(); }
};

/// Probability that a susceptible individual of each county gets infected,
/// p_i = 1 - prod_j (1 - alpha w_ij h_j).
Vec infection_prob(const Vec& hidden, const net::CommuteWeights& w, double alpha);

struct StepResult {
    CountyState state;
    Vec new_confirmed_fraction;
};

/// One forward-Euler day of the screening model: testing at rate a moves
/// hidden cases to confirmed on top of the baseline diagnosis rate.
StepResult step_screening(const CountyState& state, const DiseaseParams& params,
                          const net::CommuteWeights& w, const Vec& test_rates);

/// One forward-Euler day of the vaccination model: vaccination at rate v
/// moves susceptibles directly to removed.
StepResult step_vaccine(const CountyState& state, const DiseaseParams& params,
                        const net::CommuteWeights& w, const Vec& vacc_rates);

/// Runs the mode-appropriate step for every day of the plan. The rate vector
/// of day t acts on the transition from day t to day t+1, so the day-T rates
/// influence nothing inside the trace; the transition into day t0 is the
/// tail of the pre-intervention period and carries no intervention.
Trace simulate(const CountyState& initial, const DiseaseParams& params,
               const net::CommuteWeights& w, const Vec& population, const AllocationPlan& plan);

/// Cumulative confirmed counts summed over counties, one value per day
/// t0 .. T; non-decreasing.
Vec cumulative_confirmed(const Trace& trace);

/// State at day t0-1 built the way the observation protocol prescribes:
/// h_i = C^new_i(t0) / (beta N_i), s_i = 1, r_i = 0, and c_i from a supplied
/// cumulative-confirmed count at t0-1 (zero when absent).
CountyState initial_state_from_observations(const ObservedSeries& obs, double beta,
                                            std::size_t t0_row,
                                            const Vec* cumulative_before = nullptr);

/// Flat testing rate M / sum(N) for every county and day, capped at a_max.
AllocationPlan plan_by_population(const Vec& population, double budget, int t0, int T,
                                  double a_max);

/// One day of rates proportional to yesterday's per-capita confirmed counts,
/// scaled to spend the whole budget; counties hitting the a_max cap shed
/// their excess proportionally onto the uncapped ones. All-zero input falls
/// back to the flat rate.
Vec plan_by_infection_rate(const Vec& prev_new_confirmed, const Vec& population, double budget,
                           double a_max);

/// Reads a case series table: header row of county labels, one row per day
/// with a leading day label.
ObservedSeries load_case_series(const std::string& path, const Vec& population,
                                const std::vector<std::string>& county_labels);

} // namespace epialloc::epi

#endif
