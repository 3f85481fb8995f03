#ifndef EPIALLOC_EST_HPP
#define EPIALLOC_EST_HPP

#include <string>

#include "epialloc/epi.hpp"
#include "epialloc/linalg.hpp"
#include "epialloc/net.hpp"

namespace epialloc::est {

/// Clinical constants used to pin the diagnosis and recovery rates.
struct ClinicalInputs {
    double asymptomatic_fraction; // delta_a in [0, 1]
    double incubation_days;       // d_h > 0
    double recovery_days;         // d_r > 0
};

struct ClinicalRates {
    double beta;
    double gamma;
};

/// beta = (1 - delta_a) / d_h, gamma = 1 / d_r. Rejects inputs whose rates
/// sum to 1 or more (the one-day update would go negative).
ClinicalRates clinical_rates(const ClinicalInputs& c);

/// Hidden fractions inverted from confirmed counts, h_i(t) =
/// C^new_i(t+1) / (N_i beta): row t of the result is the hidden estimate at
/// time t, covering times 0 .. days-1 when the series covers days 1 .. days.
struct HiddenSeries {
    Matrix h;
    double max_value = 0.0;
    bool above_one = false; // some estimate exceeded 1; kept, but suspicious
};

HiddenSeries hidden_from_confirmed(const epi::ObservedSeries& obs, double beta_hat);

/// Model forecast of hidden fractions from a start vector: steps rows, row k
/// being the (k+1)-step forecast h(t+1) = p(h(t)) + (1 - beta - gamma) h(t).
Matrix forecast_hidden(const Vec& h_start, double alpha, double lambda, double beta_hat,
                       double gamma_hat, const net::DistanceTable& dist, std::size_t steps);

/// Coarse-to-fine grid over (alpha, lambda). A negative lambda_max resolves
/// to the largest weight-valid lambda of the distance table. Each refinement
/// round re-grids a one-cell neighborhood of the incumbent.
struct SearchSpec {
    double alpha_min = 0.01;
    double alpha_max = 0.99;
    double lambda_min = 0.0;
    double lambda_max = -1.0;
    int grid_size = 20;
    int refinement_rounds = 2;
};

enum class EstimatorId { loglinear, trajectory };

const char* estimator_name(EstimatorId id);
EstimatorId parse_estimator(const std::string& s);

struct SearchDiagnostics {
    double alpha_lo = 0.0, alpha_hi = 0.0;
    double lambda_lo = 0.0, lambda_hi = 0.0;
    int grid_size = 0;
    int refinement_rounds = 0;
    long evaluations = 0;
    long dropped_cells = 0; // loglinear cells excluded by the zero rule
    double max_hidden = 0.0;
    bool hidden_above_one = false;
    bool high_hidden_warning = false; // max hidden > 0.1; s ~ 1 is doubtful
};

struct EstimationResult {
    double alpha_hat = 0.0;
    double lambda_hat = 0.0;
    double objective_value = 0.0;
    EstimatorId estimator_id = EstimatorId::trajectory;
    SearchDiagnostics diagnostics;
};

/// Least squares on the log scale: the forecast of ln h_i(t) from h_i(0)
/// accumulates p_i(tau)/h_i(tau) - (beta + gamma). Cells whose running
/// history touches a zero estimate are dropped, not imputed.
EstimationResult fit_alpha_lambda_loglinear(const epi::ObservedSeries& obs, double beta_hat,
                                            double gamma_hat, const net::DistanceTable& dist,
                                            const SearchSpec& spec);

/// Absolute error between observed and model-forecast hidden-case totals,
/// with the forecast rolled out recursively from h(0).
EstimationResult fit_alpha_lambda_trajectory(const epi::ObservedSeries& obs, double beta_hat,
                                             double gamma_hat, const net::DistanceTable& dist,
                                             const SearchSpec& spec);

/// One-step-ahead forecast of the hidden fractions at t0-1 from the last
/// inverted row.
Vec estimate_h0(const Matrix& hidden, double alpha_hat, double lambda_hat, double beta_hat,
                double gamma_hat, const net::DistanceTable& dist);

/// Centered moving average over days (truncated at the edges); window <= 1
/// returns the input unchanged.
Matrix smooth_series(const Matrix& series, int window);

/// The trailing `window` days of a series (all of it when window <= 0 or
/// longer than the series).
epi::ObservedSeries trailing_window(const epi::ObservedSeries& obs, int window);

} // namespace epialloc::est

#endif
