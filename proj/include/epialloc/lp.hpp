#ifndef EPIALLOC_LP_HPP
#define EPIALLOC_LP_HPP

#include "epialloc/linalg.hpp"

namespace epialloc::lp {

enum class LpStatus { optimal, infeasible, unbounded };

const char* status_name(LpStatus s);

struct LpSolution {
    Vec x;
    double objective = 0.0;
    LpStatus status = LpStatus::optimal;
};

/// min c'x  subject to  A x <= b,  0 <= x <= upper.
/// upper entries may be +infinity.
struct LinearProgram {
    Matrix A;
    Vec b;
    Vec c;
    Vec upper;
};

/// Dense two-phase tableau simplex. Entering column follows the most
/// negative reduced cost; after 2*(rows+cols) consecutive degenerate pivots
/// the solver switches to Bland's rule, which cannot cycle. Infeasible and
/// unbounded problems are reported through the status field, never thrown.
LpSolution simplex_solve(const LinearProgram& lp);

/// The per-day allocation subproblem: min c'x with sum_i N_i x_i <= M and
/// 0 <= x <= upper.
struct BudgetLp {
    Vec cost;
    Vec population;
    double budget = 0.0;
    Vec upper;
};

/// Closed-form solution of the budget polytope subproblem: counties with
/// negative cost are filled to their cap in ascending order of
/// cost/population until the budget runs out (fractional knapsack). Ties
/// break toward the lower county index.
LpSolution budget_oracle(const BudgetLp& p);

/// The same subproblem as a general LP, for cross-checking the oracle
/// against the simplex.
LinearProgram to_linear_program(const BudgetLp& p);

} // namespace epialloc::lp

#endif
