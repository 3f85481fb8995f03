#ifndef EPIALLOC_OPT_HPP
#define EPIALLOC_OPT_HPP

#include <cstddef>
#include <vector>

#include "epialloc/epi.hpp"
#include "epialloc/linalg.hpp"
#include "epialloc/net.hpp"

namespace epialloc::opt {

/// Everything the surrogate bound needs: the relaxed objective is
/// F* = N' (sum_t P(t)) h0 with P(t0) = I and P(t+1) = U(t) P(t), where U(t)
/// is the day step matrix of the active mode. The a_max invariant keeps
/// every U(t) nonnegative over the feasible set.
struct SurrogateInstance {
    epi::DiseaseParams params;
    net::CommuteWeights W;
    Vec N;
    Vec h0; // hidden fractions at day t0 - 1
    int t0 = 0;
    int T = 0;
    double budget = 0.0;
    double a_max = 0.0;
    epi::Mode mode = epi::Mode::screening;
    double fairness_delta = 0.0;

    std::size_t counties() const { return N.size(); }
    std::size_t days() const { return static_cast<std::size_t>(T - t0 + 1); }
    void validate() const;

    /// Largest cumulative vaccination rate county i may receive while the
    /// vaccination step matrix stays nonnegative (also at most 1: nobody is
    /// vaccinated twice).
    double cumulative_cap(std::size_t i) const;
};

/// U(t) = (1 - beta - gamma) I - diag(a(t)) + alpha W.
Matrix build_step_matrix(const SurrogateInstance& inst, const Vec& rates);

/// U_vac(t) = (1 - beta - gamma) I - diag(sum of v up to t) + alpha W.
Matrix build_step_matrix_vac(const SurrogateInstance& inst, const Vec& cumulative_rates);

double surrogate_objective(const SurrogateInstance& inst, const epi::AllocationPlan& plan);

/// Gradient of F* with respect to each day's rate vector, as a days x n
/// matrix. Computed from one forward pass of prefix propagations y(t) and
/// one backward pass of suffix propagations; with fairness_delta = 0 every
/// entry is <= 0 and the day-T row is identically zero (day-T rates act
/// beyond the horizon).
Matrix surrogate_gradient(const SurrogateInstance& inst, const epi::AllocationPlan& plan);

struct FrankWolfeOptions {
    int iterations = 200;
    double rel_tol = 1e-8;
    int stall_limit = 5;
    bool verify_lp = false; // cross-check the greedy oracle against the simplex
    bool keep_log = true;
};

struct IterationStat {
    int iteration = 0;
    double objective = 0.0;
    double step_norm = 0.0;
    std::vector<std::size_t> day_support;
};

struct FrankWolfeResult {
    epi::AllocationPlan plan;
    double objective = 0.0;
    double initial_objective = 0.0;
    int iterations = 0;
    bool stalled = false; // objective stopped improving; loop ended early
    std::size_t lp_discrepancies = 0;
    std::vector<IterationStat> log;
};

/// Frank-Wolfe with step 1/(k+1). Screening solves one budget LP per day via
/// the greedy oracle; vaccination solves one joint LP across all days so the
/// per-county cumulative caps are honored. Returns the best iterate seen.
FrankWolfeResult frank_wolfe(const SurrogateInstance& inst, const epi::AllocationPlan& initial,
                             const FrankWolfeOptions& options = {});

/// Zero plan matching the instance, the default starting point.
epi::AllocationPlan initial_plan(const SurrogateInstance& inst);

} // namespace epialloc::opt

#endif
