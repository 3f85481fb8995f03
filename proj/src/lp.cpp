#include "epialloc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "epialloc/error.hpp"

namespace epialloc::lp {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;

/// Tableau rows plus one reduced-cost row; basis[i] is the column that is
/// basic in row i. The rhs lives in the last column of each row.
struct Tableau {
    std::vector<Vec> row;
    Vec cost; // reduced costs, last entry = -objective
    std::vector<std::size_t> basis;

    std::size_t ncols() const { return cost.size(); }
    std::size_t rhs_col() const { return cost.size() - 1; }

    void pivot(std::size_t r, std::size_t c) {
        const double p = row[r][c];
        for (double& v : row[r]) v /= p;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == r) continue;
            double f = row[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < ncols(); ++j) row[i][j] -= f * row[r][j];
        }
        double f = cost[c];
        if (f != 0.0)
            for (std::size_t j = 0; j < ncols(); ++j) cost[j] -= f * row[r][j];
        basis[r] = c;
    }
};

enum class LoopResult { optimal, unbounded };

/// Pivots until no reduced cost is below -kPivotTol. allowed_cols bounds the
/// columns eligible to enter (used to keep artificials out in phase 2).
LoopResult run_pivots(Tableau& t, std::size_t allowed_cols) {
    const std::size_t m = t.row.size();
    const std::size_t degenerate_limit = 2 * (m + allowed_cols);
    std::size_t degenerate_run = 0;
    bool bland = false;
    const std::size_t max_pivots = 1000 * (m + allowed_cols + 10);

    for (std::size_t iter = 0; iter < max_pivots; ++iter) {
        // Entering column.
        std::size_t enter = allowed_cols;
        if (bland) {
            for (std::size_t j = 0; j < allowed_cols; ++j)
                if (t.cost[j] < -kPivotTol) {
                    enter = j;
                    break;
                }
        } else {
            double best = -kPivotTol;
            for (std::size_t j = 0; j < allowed_cols; ++j)
                if (t.cost[j] < best) {
                    best = t.cost[j];
                    enter = j;
                }
        }
        if (enter == allowed_cols) return LoopResult::optimal;

        // Ratio test; ties resolved toward the smallest basic variable index.
        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            double a = t.row[i][enter];
            if (a <= kPivotTol) continue;
            double ratio = t.row[i][t.rhs_col()] / a;
            if (ratio < best_ratio - kPivotTol ||
                (ratio < best_ratio + kPivotTol && (leave == m || t.basis[i] < t.basis[leave]))) {
                best_ratio = ratio;
                leave = i;
            }
        }
        if (leave == m) return LoopResult::unbounded;

        double before = t.cost[t.rhs_col()];
        t.pivot(leave, enter);
        if (std::abs(t.cost[t.rhs_col()] - before) < 1e-13) {
            if (++degenerate_run > degenerate_limit) bland = true;
        } else {
            degenerate_run = 0;
        }
    }
    throw std::runtime_error("simplex exceeded its pivot budget");
}

} // namespace

const char* status_name(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

LpSolution simplex_solve(const LinearProgram& lp) {
    const std::size_t n = lp.c.size();
    if (lp.A.cols() != n && !(lp.A.rows() == 0 && lp.b.empty()))
        fail(Errc::DimensionMismatch, "LP constraint matrix does not match cost vector");
    if (lp.A.rows() != lp.b.size())
        fail(Errc::DimensionMismatch, "LP rhs does not match constraint rows");
    if (lp.upper.size() != n)
        fail(Errc::DimensionMismatch, "LP upper bounds do not match cost vector");

    // Fold finite upper bounds in as ordinary rows.
    std::vector<Vec> rows;
    Vec rhs;
    for (std::size_t i = 0; i < lp.A.rows(); ++i) {
        rows.push_back(lp.A.row(i));
        rhs.push_back(lp.b[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lp.upper[j])) continue;
        Vec r(n, 0.0);
        r[j] = 1.0;
        rows.push_back(std::move(r));
        rhs.push_back(lp.upper[j]);
    }
    const std::size_t m = rows.size();

    // Columns: n structural, m slacks, then one artificial per negative-rhs
    // row, rhs last.
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m; ++i)
        if (rhs[i] < 0.0) art_rows.push_back(i);
    const std::size_t n_art = art_rows.size();
    const std::size_t total = n + m + n_art + 1;

    Tableau t;
    t.row.assign(m, Vec(total, 0.0));
    t.basis.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t.row[i][j] = rows[i][j];
        t.row[i][n + i] = 1.0;
        t.row[i][total - 1] = rhs[i];
        t.basis[i] = n + i;
    }
    for (std::size_t k = 0; k < n_art; ++k) {
        std::size_t i = art_rows[k];
        for (double& v : t.row[i]) v = -v;
        t.row[i][n + m + k] = 1.0;
        t.basis[i] = n + m + k;
    }

    if (n_art > 0) {
        // Phase 1: minimize the sum of artificials.
        t.cost.assign(total, 0.0);
        for (std::size_t k = 0; k < n_art; ++k) t.cost[n + m + k] = 1.0;
        for (std::size_t i : art_rows)
            for (std::size_t j = 0; j < total; ++j) t.cost[j] -= t.row[i][j];
        run_pivots(t, n + m + n_art);
        double phase1 = -t.cost[total - 1];
        if (phase1 > kFeasTol) return LpSolution{Vec(n, 0.0), 0.0, LpStatus::infeasible};

        // Drive leftover artificials out of the basis; rows that cannot
        // pivot are redundant and dropped.
        for (std::size_t i = 0; i < t.row.size();) {
            if (t.basis[i] < n + m) {
                ++i;
                continue;
            }
            std::size_t col = n + m;
            for (std::size_t j = 0; j < n + m; ++j)
                if (std::abs(t.row[i][j]) > kPivotTol) {
                    col = j;
                    break;
                }
            if (col < n + m) {
                t.pivot(i, col);
                ++i;
            } else {
                t.row.erase(t.row.begin() + static_cast<std::ptrdiff_t>(i));
                t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
            }
        }
    } else {
        t.cost.assign(total, 0.0);
    }

    // Phase 2 objective.
    std::fill(t.cost.begin(), t.cost.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) t.cost[j] = lp.c[j];
    for (std::size_t i = 0; i < t.row.size(); ++i) {
        std::size_t jb = t.basis[i];
        if (jb < n && lp.c[jb] != 0.0) {
            double f = t.cost[jb];
            for (std::size_t j = 0; j < total; ++j) t.cost[j] -= f * t.row[i][j];
        }
    }
    if (run_pivots(t, n + m) == LoopResult::unbounded)
        return LpSolution{Vec(n, 0.0), 0.0, LpStatus::unbounded};

    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < t.row.size(); ++i)
        if (t.basis[i] < n) sol.x[t.basis[i]] = std::max(0.0, t.row[i][total - 1]);
    sol.objective = dot(lp.c, sol.x);
    return sol;
}

LpSolution budget_oracle(const BudgetLp& p) {
    const std::size_t n = p.cost.size();
    if (p.population.size() != n || p.upper.size() != n)
        fail(Errc::DimensionMismatch, "budget LP fields disagree on county count");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p.population[i] > 0.0))
            fail(Errc::NonPositivePopulation, "budget LP needs positive populations");
        if (p.upper[i] < 0.0) fail(Errc::RateTooLarge, "negative upper bound");
    }
    if (p.budget < 0.0) fail(Errc::BudgetExceeded, "negative budget");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ra = p.cost[a] / p.population[a];
        double rb = p.cost[b] / p.population[b];
        if (ra != rb) return ra < rb;
        return a < b;
    });

    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.x.assign(n, 0.0);
    double remaining = p.budget;
    for (std::size_t i : order) {
        if (p.cost[i] >= 0.0) break; // sorted, so nothing negative remains
        if (remaining <= 0.0) break;
        double take = std::min(p.upper[i], remaining / p.population[i]);
        if (take <= 0.0) continue;
        sol.x[i] = take;
        remaining -= take * p.population[i];
    }
    sol.objective = dot(p.cost, sol.x);
    return sol;
}

LinearProgram to_linear_program(const BudgetLp& p) {
    LinearProgram lp;
    lp.A = Matrix(1, p.cost.size());
    for (std::size_t i = 0; i < p.cost.size(); ++i) lp.A(0, i) = p.population[i];
    lp.b = Vec{p.budget};
    lp.c = p.cost;
    lp.upper = p.upper;
    return lp;
}

} // namespace epialloc::lp
