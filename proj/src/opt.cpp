#include "epialloc/opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epialloc/error.hpp"
#include "epialloc/lp.hpp"
#include "epialloc/tabular.hpp"

namespace epialloc::opt {

namespace {

constexpr double kDiagTol = 1e-12;

/// y <- U y without materializing U: (1 - beta - gamma) y - d.y + alpha W y,
/// where d is the day's diagonal reduction (rates, or their cumulative sum
/// in vaccination mode). Validates the diagonal the same way the explicit
/// builders do.
Vec apply_step(const SurrogateInstance& inst, const Vec& diag_reduction, const Vec& y) {
    const std::size_t n = inst.counties();
    const double keep = 1.0 - inst.params.beta - inst.params.gamma;
    Vec out = matvec(inst.W.W, y);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = keep - diag_reduction[i] + inst.params.alpha * inst.W.W(i, i);
        if (diag < -kDiagTol)
            fail(Errc::NegativeMatrixEntry,
                 "step matrix diagonal " + format_double(diag) + " in county " +
                     std::to_string(i));
        out[i] = inst.params.alpha * out[i] + (keep - diag_reduction[i]) * y[i];
    }
    return out;
}

Matrix build_matrix(const SurrogateInstance& inst, const Vec& diag_reduction) {
    const std::size_t n = inst.counties();
    if (diag_reduction.size() != n)
        fail(Errc::DimensionMismatch, "rate vector does not match instance size");
    const double keep = 1.0 - inst.params.beta - inst.params.gamma;
    Matrix u(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) u(i, j) = inst.params.alpha * inst.W.W(i, j);
        double diag = keep - diag_reduction[i] + inst.params.alpha * inst.W.W(i, i);
        if (diag < -kDiagTol)
            fail(Errc::NegativeMatrixEntry, "step matrix diagonal " + format_double(diag) +
                                                " in county " + std::to_string(i) +
                                                "; rate cap too aggressive");
        u(i, i) = std::max(0.0, diag);
    }
    return u;
}

/// Per-day diagonal reductions for the plan: the day's rates in screening
/// mode, their running sum in vaccination mode.
std::vector<Vec> diag_reductions(const SurrogateInstance& inst, const epi::AllocationPlan& plan) {
    std::vector<Vec> out;
    out.reserve(plan.days());
    Vec cum(inst.counties(), 0.0);
    for (std::size_t k = 0; k < plan.days(); ++k) {
        Vec rates = plan.rates.row(k);
        if (inst.mode == epi::Mode::screening) {
            out.push_back(std::move(rates));
        } else {
            for (std::size_t i = 0; i < cum.size(); ++i) cum[i] += rates[i];
            out.push_back(cum);
        }
    }
    return out;
}

void check_plan(const SurrogateInstance& inst, const epi::AllocationPlan& plan) {
    if (plan.t0 != inst.t0 || plan.T != inst.T)
        fail(Errc::DimensionMismatch, "plan horizon does not match instance");
    if (plan.mode != inst.mode) fail(Errc::DimensionMismatch, "plan mode does not match instance");
    plan.validate(inst.N, inst.a_max);
    if (inst.mode == epi::Mode::vaccination) {
        for (std::size_t i = 0; i < inst.counties(); ++i) {
            double total = 0.0;
            for (std::size_t k = 0; k < plan.days(); ++k) total += plan.rates(k, i);
            if (total > inst.cumulative_cap(i) + 1e-9)
                fail(Errc::RateTooLarge, "cumulative vaccination " + format_double(total) +
                                             " exceeds cap in county " + std::to_string(i));
        }
    }
}

double fairness_penalty(const SurrogateInstance& inst, const epi::AllocationPlan& plan) {
    if (inst.fairness_delta <= 0.0) return 0.0;
    double acc = 0.0;
    const std::size_t n = plan.rates.cols();
    for (std::size_t k = 0; k < plan.rates.rows(); ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += plan.rates(k, i);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d = plan.rates(k, i) - mean;
            acc += d * d;
        }
    }
    return inst.fairness_delta * acc;
}

std::vector<std::size_t> support_sizes(const epi::AllocationPlan& plan) {
    std::vector<std::size_t> out(plan.rates.rows(), 0);
    for (std::size_t k = 0; k < plan.rates.rows(); ++k)
        for (std::size_t i = 0; i < plan.rates.cols(); ++i)
            if (plan.rates(k, i) != 0.0) ++out[k];
    return out;
}

/// Linear minimization oracle over the feasible set. Screening decomposes
/// into one budget LP per day; vaccination couples days through the
/// cumulative caps, so all days are solved as one LP.
Matrix solve_direction(const SurrogateInstance& inst, const Matrix& gradient, bool verify_lp,
                       std::size_t& discrepancies) {
    const std::size_t n = inst.counties();
    const std::size_t horizon = gradient.rows();
    Matrix direction(horizon, n, 0.0);

    if (inst.mode == epi::Mode::screening) {
        for (std::size_t k = 0; k < horizon; ++k) {
            lp::BudgetLp sub{gradient.row(k), inst.N, inst.budget, Vec(n, inst.a_max)};
            lp::LpSolution greedy = lp::budget_oracle(sub);
            if (verify_lp) {
                lp::LpSolution exact = lp::simplex_solve(lp::to_linear_program(sub));
                double tol = 1e-8 * std::max(1.0, std::abs(greedy.objective));
                if (exact.status != lp::LpStatus::optimal ||
                    std::abs(exact.objective - greedy.objective) > tol)
                    ++discrepancies;
            }
            direction.set_row(k, greedy.x);
        }
        return direction;
    }

    // Joint LP: variables x[k * n + i], day budgets + per-county cumulative
    // caps as rows, box bound a_max per variable.
    const std::size_t vars = horizon * n;
    lp::LinearProgram joint;
    joint.A = Matrix(horizon + n, vars, 0.0);
    joint.b.assign(horizon + n, 0.0);
    for (std::size_t k = 0; k < horizon; ++k) {
        for (std::size_t i = 0; i < n; ++i) joint.A(k, k * n + i) = inst.N[i];
        joint.b[k] = inst.budget;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < horizon; ++k) joint.A(horizon + i, k * n + i) = 1.0;
        joint.b[horizon + i] = inst.cumulative_cap(i);
    }
    joint.c.assign(vars, 0.0);
    for (std::size_t k = 0; k < horizon; ++k)
        for (std::size_t i = 0; i < n; ++i) joint.c[k * n + i] = gradient(k, i);
    joint.upper.assign(vars, inst.a_max);

    lp::LpSolution sol = lp::simplex_solve(joint);
    if (sol.status != lp::LpStatus::optimal)
        throw std::runtime_error("vaccination subproblem reported " +
                                 std::string(lp::status_name(sol.status)));
    for (std::size_t k = 0; k < horizon; ++k)
        for (std::size_t i = 0; i < n; ++i) direction(k, i) = sol.x[k * n + i];
    return direction;
}

} // namespace

void SurrogateInstance::validate() const {
    params.validate();
    const std::size_t n = counties();
    if (W.n != n || h0.size() != n)
        fail(Errc::DimensionMismatch, "instance fields disagree on county count");
    if (T < t0) fail(Errc::DimensionMismatch, "instance has T < t0");
    if (budget < 0.0) fail(Errc::BudgetExceeded, "negative budget");
    if (a_max < 0.0 || fairness_delta < 0.0)
        fail(Errc::RateTooLarge, "a_max and fairness_delta must be nonnegative");
    if (params.beta + params.gamma + a_max > 1.0)
        fail(Errc::RateTooLarge, "beta + gamma + a_max exceeds 1");
    double min_diag = 1.0;
    for (std::size_t i = 0; i < n; ++i) min_diag = std::min(min_diag, W.W(i, i));
    if (1.0 - params.beta - params.gamma - a_max + params.alpha * min_diag < -kDiagTol)
        fail(Errc::NegativeMatrixEntry,
             "a_max allows a negative step-matrix diagonal; lower a_max or lambda");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(N[i] > 0.0)) fail(Errc::NonPositivePopulation, "populations must be positive");
        if (h0[i] < 0.0) fail(Errc::NegativeCompartment, "h0 must be nonnegative");
    }
}

double SurrogateInstance::cumulative_cap(std::size_t i) const {
    double bound = 1.0 - params.beta - params.gamma + params.alpha * W.W(i, i);
    return std::min(1.0, bound);
}

Matrix build_step_matrix(const SurrogateInstance& inst, const Vec& rates) {
    return build_matrix(inst, rates);
}

Matrix build_step_matrix_vac(const SurrogateInstance& inst, const Vec& cumulative_rates) {
    return build_matrix(inst, cumulative_rates);
}

double surrogate_objective(const SurrogateInstance& inst, const epi::AllocationPlan& plan) {
    inst.validate();
    check_plan(inst, plan);
    std::vector<Vec> reductions = diag_reductions(inst, plan);
    Vec y = inst.h0;
    double total = dot(inst.N, y);
    // Terms t0+1 .. T; the day-T reduction never enters a product.
    for (std::size_t k = 0; k + 1 < plan.days(); ++k) {
        y = apply_step(inst, reductions[k], y);
        total += dot(inst.N, y);
    }
    return total + fairness_penalty(inst, plan);
}

Matrix surrogate_gradient(const SurrogateInstance& inst, const epi::AllocationPlan& plan) {
    inst.validate();
    check_plan(inst, plan);
    const std::size_t n = inst.counties();
    const std::size_t horizon = plan.days();
    std::vector<Vec> reductions = diag_reductions(inst, plan);

    // Prefix propagations y(t) = P(t) h0 for t = t0 .. T-1.
    std::vector<Vec> prefix(horizon);
    prefix[0] = inst.h0;
    for (std::size_t k = 0; k + 1 < horizon; ++k)
        prefix[k + 1] = apply_step(inst, reductions[k], prefix[k]);

    // Suffix propagations mu(t) = N + U(t) mu(t+1), t = T-1 .. t0+1; U is
    // symmetric, so the adjoint recursion reuses apply_step.
    Matrix grad(horizon, n, 0.0);
    if (horizon > 1) {
        Vec mu = inst.N; // mu(T)
        for (std::size_t k = horizon - 1; k-- > 0;) {
            for (std::size_t i = 0; i < n; ++i) grad(k, i) = -mu[i] * prefix[k][i];
            if (k > 0) {
                Vec propagated = apply_step(inst, reductions[k], mu);
                for (std::size_t i = 0; i < n; ++i) mu[i] = inst.N[i] + propagated[i];
            }
        }
    }

    if (inst.mode == epi::Mode::vaccination) {
        // v(t) enters every later day's step matrix: suffix-sum the per-day
        // sensitivities.
        for (std::size_t k = horizon - 1; k-- > 0;)
            for (std::size_t i = 0; i < n; ++i) grad(k, i) += grad(k + 1, i);
    }

    if (inst.fairness_delta > 0.0) {
        for (std::size_t k = 0; k < horizon; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += plan.rates(k, i);
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                grad(k, i) += 2.0 * inst.fairness_delta * (plan.rates(k, i) - mean);
        }
    }
    return grad;
}

epi::AllocationPlan initial_plan(const SurrogateInstance& inst) {
    return epi::zero_plan(inst.counties(), inst.t0, inst.T, inst.budget, inst.mode);
}

FrankWolfeResult frank_wolfe(const SurrogateInstance& inst, const epi::AllocationPlan& initial,
                             const FrankWolfeOptions& options) {
    inst.validate();
    if (options.iterations < 1) fail(Errc::EmptySearchSpace, "need at least one iteration");

    FrankWolfeResult result;
    epi::AllocationPlan plan = initial;
    check_plan(inst, plan);
    result.initial_objective = surrogate_objective(inst, plan);
    result.plan = plan;
    result.objective = result.initial_objective;

    double previous = result.initial_objective;
    int stall = 0;
    for (int k = 0; k < options.iterations; ++k) {
        Matrix gradient = surrogate_gradient(inst, plan);
        Matrix direction =
            solve_direction(inst, gradient, options.verify_lp, result.lp_discrepancies);
        const double step = 1.0 / static_cast<double>(k + 1);
        double step_norm_sq = 0.0;
        for (std::size_t r = 0; r < plan.rates.rows(); ++r) {
            for (std::size_t c = 0; c < plan.rates.cols(); ++c) {
                double move = step * (direction(r, c) - plan.rates(r, c));
                plan.rates(r, c) += move;
                step_norm_sq += move * move;
            }
        }
        double objective = surrogate_objective(inst, plan);
        result.iterations = k + 1;
        if (options.keep_log)
            result.log.push_back(
                {k, objective, std::sqrt(step_norm_sq), support_sizes(plan)});
        if (objective < result.objective) {
            result.objective = objective;
            result.plan = plan;
        }
        double improvement = (previous - objective) / std::max(std::abs(previous), 1e-300);
        stall = (improvement < options.rel_tol) ? stall + 1 : 0;
        previous = objective;
        if (stall >= options.stall_limit) {
            result.stalled = true;
            break;
        }
    }
    return result;
}

} // namespace epialloc::opt
