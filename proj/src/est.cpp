#include "epialloc/est.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "epialloc/error.hpp"
#include "epialloc/tabular.hpp"

namespace epialloc::est {

namespace {

struct GridPoint {
    double alpha = 0.0;
    double lambda = 0.0;
    double objective = std::numeric_limits<double>::infinity();
};

bool better(const GridPoint& a, const GridPoint& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.lambda < b.lambda;
}

/// Deterministic coarse-to-fine search. Points where the objective is not
/// evaluable (e.g. lambda beyond the weight-valid range) score infinity.
GridPoint grid_search(const SearchSpec& spec, double lambda_max_resolved,
                      SearchDiagnostics& diag,
                      const std::function<double(double, double)>& objective) {
    const int g = spec.grid_size;
    double alo = spec.alpha_min, ahi = spec.alpha_max;
    double llo = spec.lambda_min, lhi = lambda_max_resolved;
    if (g < 1 || !(alo <= ahi) || !(llo <= lhi) || !std::isfinite(alo + ahi + llo + lhi))
        fail(Errc::EmptySearchSpace, "bad search grid: alpha [" + format_double(alo) + ", " +
                                         format_double(ahi) + "], lambda [" + format_double(llo) +
                                         ", " + format_double(lhi) + "], " + std::to_string(g) +
                                         " points per axis");
    diag.alpha_lo = alo;
    diag.alpha_hi = ahi;
    diag.lambda_lo = llo;
    diag.lambda_hi = lhi;
    diag.grid_size = g;
    diag.refinement_rounds = spec.refinement_rounds;

    GridPoint best;
    double box_alo = alo, box_ahi = ahi, box_llo = llo, box_lhi = lhi;
    for (int round = 0; round <= spec.refinement_rounds; ++round) {
        double astep = (g > 1) ? (box_ahi - box_alo) / (g - 1) : 0.0;
        double lstep = (g > 1) ? (box_lhi - box_llo) / (g - 1) : 0.0;
        for (int ia = 0; ia < g; ++ia) {
            for (int il = 0; il < g; ++il) {
                GridPoint p;
                p.alpha = box_alo + astep * ia;
                p.lambda = box_llo + lstep * il;
                ++diag.evaluations;
                try {
                    p.objective = objective(p.alpha, p.lambda);
                } catch (const Error&) {
                    continue;
                }
                if (!std::isfinite(p.objective)) continue;
                if (better(p, best)) best = p;
            }
        }
        if (!std::isfinite(best.objective))
            fail(Errc::EmptySearchSpace, "no admissible grid point");
        // Re-grid one cell around the incumbent, clamped to the user box.
        box_alo = std::max(alo, best.alpha - astep);
        box_ahi = std::min(ahi, best.alpha + astep);
        box_llo = std::max(llo, best.lambda - lstep);
        box_lhi = std::min(lhi, best.lambda + lstep);
    }
    return best;
}

void fill_hidden_diagnostics(const HiddenSeries& hidden, SearchDiagnostics& diag) {
    diag.max_hidden = hidden.max_value;
    diag.hidden_above_one = hidden.above_one;
    diag.high_hidden_warning = hidden.max_value > 0.1;
}

} // namespace

const char* estimator_name(EstimatorId id) {
    return id == EstimatorId::loglinear ? "loglinear" : "trajectory";
}

EstimatorId parse_estimator(const std::string& s) {
    if (s == "loglinear") return EstimatorId::loglinear;
    if (s == "trajectory") return EstimatorId::trajectory;
    fail(Errc::ParseError, "unknown estimator '" + s + "'");
}

ClinicalRates clinical_rates(const ClinicalInputs& c) {
    if (!(c.incubation_days > 0.0) || !(c.recovery_days > 0.0) ||
        c.asymptomatic_fraction < 0.0 || c.asymptomatic_fraction > 1.0)
        fail(Errc::RateSumOverflow, "clinical inputs out of range");
    ClinicalRates r{(1.0 - c.asymptomatic_fraction) / c.incubation_days, 1.0 / c.recovery_days};
    if (r.beta + r.gamma >= 1.0)
        fail(Errc::RateSumOverflow, "beta + gamma = " + format_double(r.beta + r.gamma) +
                                        " must stay below 1");
    return r;
}

HiddenSeries hidden_from_confirmed(const epi::ObservedSeries& obs, double beta_hat) {
    if (!(beta_hat > 0.0)) fail(Errc::ZeroBeta, "beta must be positive to invert counts");
    if (obs.days() < 2) fail(Errc::TooFewDays, "need at least 2 observed days");
    HiddenSeries out;
    out.h = Matrix(obs.days(), obs.counties(), 0.0);
    for (std::size_t t = 0; t < obs.days(); ++t) {
        for (std::size_t i = 0; i < obs.counties(); ++i) {
            double v = obs.new_confirmed(t, i) / (obs.population[i] * beta_hat);
            out.h(t, i) = v;
            out.max_value = std::max(out.max_value, v);
        }
    }
    out.above_one = out.max_value > 1.0;
    return out;
}

Matrix forecast_hidden(const Vec& h_start, double alpha, double lambda, double beta_hat,
                       double gamma_hat, const net::DistanceTable& dist, std::size_t steps) {
    net::CommuteWeights w = net::build_weights(dist, lambda);
    const double keep = 1.0 - beta_hat - gamma_hat;
    Matrix out(steps, h_start.size(), 0.0);
    Vec h = h_start;
    for (std::size_t k = 0; k < steps; ++k) {
        Vec p = epi::infection_prob(h, w, alpha);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = p[i] + keep * h[i];
        out.set_row(k, h);
    }
    return out;
}

EstimationResult fit_alpha_lambda_loglinear(const epi::ObservedSeries& obs, double beta_hat,
                                            double gamma_hat, const net::DistanceTable& dist,
                                            const SearchSpec& spec) {
    HiddenSeries hidden = hidden_from_confirmed(obs, beta_hat);
    const std::size_t m = hidden.h.rows();
    const std::size_t n = hidden.h.cols();
    const double bg = beta_hat + gamma_hat;

    // First zero in each county's history; cells at or beyond it would put a
    // zero inside a logarithm or a denominator.
    std::vector<std::size_t> first_zero(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < m; ++t)
            if (hidden.h(t, i) <= 0.0) {
                first_zero[i] = t;
                break;
            }
    long usable = 0;
    for (std::size_t i = 0; i < n; ++i)
        usable += static_cast<long>(first_zero[i] > 0 ? first_zero[i] - 1 : 0);
    if (usable == 0) fail(Errc::AllCellsDropped, "every cell hits the zero-handling rule");

    EstimationResult result;
    result.estimator_id = EstimatorId::loglinear;
    fill_hidden_diagnostics(hidden, result.diagnostics);
    result.diagnostics.dropped_cells = static_cast<long>(n * (m - 1)) - usable;

    double lambda_max =
        spec.lambda_max >= 0.0 ? spec.lambda_max : net::max_valid_lambda(dist);
    GridPoint best = grid_search(
        spec, lambda_max, result.diagnostics, [&](double alpha, double lambda) {
            net::CommuteWeights w = net::build_weights(dist, lambda);
            Vec cum(n, 0.0);
            double objective = 0.0;
            for (std::size_t t = 1; t < m; ++t) {
                Vec p = epi::infection_prob(hidden.h.row(t - 1), w, alpha);
                for (std::size_t i = 0; i < n; ++i) {
                    if (t >= first_zero[i]) continue;
                    cum[i] += p[i] / hidden.h(t - 1, i);
                    double resid = std::log(hidden.h(t, i)) - std::log(hidden.h(0, i)) +
                                   bg * static_cast<double>(t) - cum[i];
                    objective += resid * resid;
                }
            }
            return objective;
        });
    result.alpha_hat = best.alpha;
    result.lambda_hat = best.lambda;
    result.objective_value = best.objective;
    return result;
}

EstimationResult fit_alpha_lambda_trajectory(const epi::ObservedSeries& obs, double beta_hat,
                                             double gamma_hat, const net::DistanceTable& dist,
                                             const SearchSpec& spec) {
    if (obs.days() < 3) fail(Errc::TooFewDays, "need at least 3 observed days");
    HiddenSeries hidden = hidden_from_confirmed(obs, beta_hat);
    const std::size_t m = hidden.h.rows();
    const std::size_t n = hidden.h.cols();

    Vec observed_total(n, 0.0);
    for (std::size_t t = 1; t < m; ++t)
        for (std::size_t i = 0; i < n; ++i) observed_total[i] += hidden.h(t, i);

    EstimationResult result;
    result.estimator_id = EstimatorId::trajectory;
    fill_hidden_diagnostics(hidden, result.diagnostics);

    double lambda_max =
        spec.lambda_max >= 0.0 ? spec.lambda_max : net::max_valid_lambda(dist);
    GridPoint best = grid_search(
        spec, lambda_max, result.diagnostics, [&](double alpha, double lambda) {
            Matrix forecast =
                forecast_hidden(hidden.h.row(0), alpha, lambda, beta_hat, gamma_hat, dist, m - 1);
            double objective = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double forecast_total = 0.0;
                for (std::size_t k = 0; k < m - 1; ++k) forecast_total += forecast(k, i);
                objective += obs.population[i] * std::abs(observed_total[i] - forecast_total);
            }
            return objective;
        });
    result.alpha_hat = best.alpha;
    result.lambda_hat = best.lambda;
    result.objective_value = best.objective;
    return result;
}

Vec estimate_h0(const Matrix& hidden, double alpha_hat, double lambda_hat, double beta_hat,
                double gamma_hat, const net::DistanceTable& dist) {
    if (hidden.rows() == 0) fail(Errc::TooFewDays, "hidden series is empty");
    Vec last = hidden.row(hidden.rows() - 1);
    net::CommuteWeights w = net::build_weights(dist, lambda_hat);
    Vec p = epi::infection_prob(last, w, alpha_hat);
    const double keep = 1.0 - beta_hat - gamma_hat;
    Vec h0(last.size(), 0.0);
    for (std::size_t i = 0; i < last.size(); ++i) h0[i] = keep * last[i] + p[i];
    return h0;
}

Matrix smooth_series(const Matrix& series, int window) {
    if (window <= 1) return series;
    const int half = window / 2;
    const int m = static_cast<int>(series.rows());
    Matrix out(series.rows(), series.cols(), 0.0);
    for (int t = 0; t < m; ++t) {
        int lo = std::max(0, t - half);
        int hi = std::min(m - 1, t + half);
        for (std::size_t i = 0; i < series.cols(); ++i) {
            double acc = 0.0;
            for (int u = lo; u <= hi; ++u) acc += series(static_cast<std::size_t>(u), i);
            out(static_cast<std::size_t>(t), i) = acc / static_cast<double>(hi - lo + 1);
        }
    }
    return out;
}

epi::ObservedSeries trailing_window(const epi::ObservedSeries& obs, int window) {
    if (window <= 0 || static_cast<std::size_t>(window) >= obs.days()) return obs;
    epi::ObservedSeries out;
    out.population = obs.population;
    out.county_labels = obs.county_labels;
    const std::size_t start = obs.days() - static_cast<std::size_t>(window);
    out.new_confirmed = Matrix(static_cast<std::size_t>(window), obs.counties(), 0.0);
    for (std::size_t t = start; t < obs.days(); ++t) {
        out.new_confirmed.set_row(t - start, obs.new_confirmed.row(t));
        if (t < obs.day_labels.size()) out.day_labels.push_back(obs.day_labels[t]);
    }
    return out;
}

} // namespace epialloc::est
