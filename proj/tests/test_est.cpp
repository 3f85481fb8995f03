#include <cmath>
#include <random>

#include "doctest.h"
#include "epialloc/epi.hpp"
#include "epialloc/error.hpp"
#include "epialloc/est.hpp"
#include "testutil.hpp"

using namespace epialloc;
using namespace epialloc::est;

namespace {

const double kBeta = 0.16;
const double kGamma = 1.0 / 15.0;

net::DistanceTable triangle_table() {
    net::DistanceTable t;
    t.n = 3;
    t.labels = {"A", "B", "C"};
    t.L = Matrix(3, 3, 0.0);
    t.L(0, 1) = t.L(1, 0) = 15.0;
    t.L(0, 2) = t.L(2, 0) = 20.0;
    t.L(1, 2) = t.L(2, 1) = 18.0;
    return t;
}

net::DistanceTable isolated_table(std::size_t n) {
    net::DistanceTable t;
    t.n = n;
    t.L = Matrix(n, n, 1000.0);
    for (std::size_t i = 0; i < n; ++i) {
        t.labels.push_back("c" + std::to_string(i));
        t.L(i, i) = 0.0;
    }
    return t;
}

/// Noiseless confirmed counts from the no-intervention model: day k+1 counts
/// are beta * N_i * h_i(k), so inverting them recovers the exact hidden path.
epi::ObservedSeries model_series(const net::DistanceTable& dist, double lambda, double alpha,
                                 const Vec& population, const Vec& h_start, int days) {
    epi::CountyState initial;
    initial.s.assign(h_start.size(), 1.0);
    initial.h = h_start;
    initial.c.assign(h_start.size(), 0.0);
    initial.r.assign(h_start.size(), 0.0);
    auto plan = epi::zero_plan(h_start.size(), 1, days, 0.0, epi::Mode::screening);
    epi::DiseaseParams params{alpha, kBeta, kGamma};
    auto w = net::build_weights(dist, lambda);
    epi::Trace trace = epi::simulate(initial, params, w, population, plan);

    epi::ObservedSeries obs;
    obs.population = population;
    obs.new_confirmed = trace.new_confirmed;
    for (int d = 1; d <= days; ++d) obs.day_labels.push_back(std::to_string(d));
    return obs;
}

} // namespace

TEST_CASE("clinical_rates") {
    ClinicalRates r = clinical_rates({0.17, 5.2, 15.0});
    CHECK(r.beta == doctest::Approx(0.83 / 5.2).epsilon(1e-14));
    CHECK(r.gamma == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
    CHECK(r.beta > 0.155);
    CHECK(r.beta < 0.165);
    CHECK(r.gamma > 0.066);
    CHECK(r.gamma < 0.068);

    CHECK(clinical_rates({1.0, 5.2, 15.0}).beta == 0.0);

    try {
        clinical_rates({0.0, 1.0, 1.0});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::RateSumOverflow);
    }

    // monotone: more asymptomatic cases lower beta, slower recovery lowers gamma
    CHECK(clinical_rates({0.3, 5.2, 15.0}).beta < clinical_rates({0.1, 5.2, 15.0}).beta);
    CHECK(clinical_rates({0.17, 5.2, 20.0}).gamma < clinical_rates({0.17, 5.2, 15.0}).gamma);
}

TEST_CASE("hidden_from_confirmed") {
    epi::ObservedSeries obs;
    obs.population = {1000.0};
    obs.new_confirmed = Matrix(2, 1, 0.0);
    obs.new_confirmed(0, 0) = 4.0;
    obs.new_confirmed(1, 0) = 8.0;
    HiddenSeries hidden = hidden_from_confirmed(obs, kBeta);
    CHECK(hidden.h(0, 0) == doctest::Approx(0.025).epsilon(1e-14));
    CHECK(hidden.h(1, 0) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK_FALSE(hidden.above_one);

    obs.new_confirmed(1, 0) = 200.0; // hidden estimate 1.25
    CHECK(hidden_from_confirmed(obs, kBeta).above_one);

    obs.new_confirmed = Matrix(1, 1, 4.0);
    try {
        hidden_from_confirmed(obs, kBeta);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewDays);
    }
    obs.new_confirmed = Matrix(2, 1, 4.0);
    CHECK_THROWS_AS(hidden_from_confirmed(obs, 0.0), Error);
}

TEST_CASE("forecast_hidden") {
    auto dist = isolated_table(1);

    Matrix zero = forecast_hidden({0.0}, 0.3, 0.0, kBeta, kGamma, dist, 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(zero(k, 0) == 0.0);

    // no transmission: pure geometric decay
    Matrix decay = forecast_hidden({0.2}, 1e-300, 0.0, kBeta, kGamma, dist, 4);
    double keep = 1.0 - kBeta - kGamma;
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(decay(k, 0) ==
              doctest::Approx(0.2 * std::pow(keep, double(k + 1))).epsilon(1e-12));

    Matrix one = forecast_hidden({0.1}, 0.3, 0.0, kBeta, kGamma, dist, 1);
    CHECK(one(0, 0) == doctest::Approx(0.10733333).epsilon(1e-7));
}

TEST_CASE("fit_alpha_lambda_loglinear: exact log-linear data on the identity network") {
    // h_i(t) = h_i(0) exp((alpha - beta - gamma) t): the objective vanishes
    // at alpha when W = I (lambda pinned to zero).
    const double alpha_true = 0.25;
    auto dist = isolated_table(2);
    Vec population{1000.0, 2000.0};
    epi::ObservedSeries obs;
    obs.population = population;
    obs.new_confirmed = Matrix(8, 2, 0.0);
    Vec h0{0.01, 0.004};
    for (std::size_t t = 0; t < 8; ++t)
        for (std::size_t i = 0; i < 2; ++i)
            obs.new_confirmed(t, i) = population[i] * kBeta * h0[i] *
                                      std::exp((alpha_true - kBeta - kGamma) * double(t));

    SearchSpec spec;
    spec.alpha_min = 0.05;
    spec.alpha_max = 0.45;
    spec.lambda_min = 0.0;
    spec.lambda_max = 0.0;
    spec.grid_size = 21; // step 0.02 puts 0.25 on the lattice
    spec.refinement_rounds = 2;
    EstimationResult fit = fit_alpha_lambda_loglinear(obs, kBeta, kGamma, dist, spec);
    CHECK(fit.alpha_hat == doctest::Approx(alpha_true).epsilon(1e-9));
    CHECK(fit.lambda_hat == 0.0);
    CHECK(fit.objective_value < 1e-16);
    CHECK(fit.estimator_id == EstimatorId::loglinear);
}

TEST_CASE("fit_alpha_lambda_loglinear: single-point grid and error paths") {
    auto dist = isolated_table(1);
    epi::ObservedSeries obs;
    obs.population = {1000.0};
    obs.new_confirmed = Matrix(4, 1, 5.0);

    SearchSpec point;
    point.alpha_min = point.alpha_max = 0.3;
    point.lambda_min = point.lambda_max = 0.0;
    point.grid_size = 1;
    point.refinement_rounds = 0;
    EstimationResult fit = fit_alpha_lambda_loglinear(obs, kBeta, kGamma, dist, point);
    CHECK(fit.alpha_hat == 0.3);
    CHECK(fit.lambda_hat == 0.0);
    CHECK(fit.objective_value >= 0.0);

    SearchSpec empty = point;
    empty.grid_size = 0;
    try {
        fit_alpha_lambda_loglinear(obs, kBeta, kGamma, dist, empty);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptySearchSpace);
    }

    obs.new_confirmed = Matrix(4, 1, 0.0);
    try {
        fit_alpha_lambda_loglinear(obs, kBeta, kGamma, dist, point);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AllCellsDropped);
    }
}

TEST_CASE("estimators recover the truth from noiseless model data") {
    auto dist = triangle_table();
    const double alpha_true = 0.3;
    const double lambda_true = 30.0;
    Vec population{500000.0, 200000.0, 300000.0};
    Vec h0{1e-9, 3e-10, 2e-10};
    epi::ObservedSeries obs = model_series(dist, lambda_true, alpha_true, population, h0, 12);

    SearchSpec spec;
    spec.alpha_min = 0.1;
    spec.alpha_max = 0.5;
    spec.lambda_min = 0.0;
    spec.lambda_max = 60.0;
    spec.grid_size = 21; // cells: 0.02 in alpha, 3 in lambda; truth on the grid
    spec.refinement_rounds = 2;

    EstimationResult traj = fit_alpha_lambda_trajectory(obs, kBeta, kGamma, dist, spec);
    CHECK(std::abs(traj.alpha_hat - alpha_true) < 1e-9);
    CHECK(std::abs(traj.lambda_hat - lambda_true) < 1e-9);
    CHECK(traj.objective_value < 1e-8);

    EstimationResult log = fit_alpha_lambda_loglinear(obs, kBeta, kGamma, dist, spec);
    CHECK(std::abs(log.alpha_hat - alpha_true) <= 0.02 + 1e-12);
    CHECK(std::abs(log.lambda_hat - lambda_true) <= 3.0 + 1e-12);

    // identical SearchSpec, identical answer
    EstimationResult again = fit_alpha_lambda_trajectory(obs, kBeta, kGamma, dist, spec);
    CHECK(again.alpha_hat == traj.alpha_hat);
    CHECK(again.lambda_hat == traj.lambda_hat);
    CHECK(again.objective_value == traj.objective_value);
}

TEST_CASE("fit_alpha_lambda_trajectory: too few days") {
    auto dist = isolated_table(1);
    epi::ObservedSeries obs;
    obs.population = {1000.0};
    obs.new_confirmed = Matrix(2, 1, 5.0);
    SearchSpec spec;
    try {
        fit_alpha_lambda_trajectory(obs, kBeta, kGamma, dist, spec);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TooFewDays);
    }
}

TEST_CASE("estimate_h0") {
    auto dist = isolated_table(1);
    Matrix hidden(3, 1, 0.0);
    hidden(2, 0) = 0.05;

    Vec no_spread = estimate_h0(hidden, 1e-300, 0.0, kBeta, kGamma, dist);
    CHECK(no_spread[0] == doctest::Approx((1.0 - kBeta - kGamma) * 0.05).epsilon(1e-12));

    Vec forecast = estimate_h0(hidden, 0.3, 0.0, kBeta, kGamma, dist);
    CHECK(forecast[0] == doctest::Approx(0.05366667).epsilon(1e-6));

    Matrix zeros(2, 1, 0.0);
    CHECK(estimate_h0(zeros, 0.3, 0.0, kBeta, kGamma, dist) == Vec{0.0});

    // bracketing property on a networked table
    auto tri = triangle_table();
    Matrix h(2, 3, 0.0);
    h(1, 0) = 0.03;
    h(1, 1) = 0.08;
    h(1, 2) = 0.001;
    Vec h0 = estimate_h0(h, 0.4, 50.0, kBeta, kGamma, tri);
    double keep = 1.0 - kBeta - kGamma;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(h0[i] >= keep * h(1, i));
        CHECK(h0[i] <= keep * h(1, i) + 1.0);
    }
}

TEST_CASE("smooth_series and trailing_window") {
    Matrix series(5, 1, 0.0);
    for (std::size_t t = 0; t < 5; ++t) series(t, 0) = double(t);
    Matrix smooth = smooth_series(series, 3);
    CHECK(smooth(0, 0) == doctest::Approx(0.5));  // truncated edge
    CHECK(smooth(2, 0) == doctest::Approx(2.0));
    CHECK(smooth(4, 0) == doctest::Approx(3.5));
    CHECK(smooth_series(series, 1) == series);

    epi::ObservedSeries obs;
    obs.population = {10.0};
    obs.new_confirmed = series;
    obs.day_labels = {"1", "2", "3", "4", "5"};
    epi::ObservedSeries tail = trailing_window(obs, 2);
    CHECK(tail.days() == 2);
    CHECK(tail.new_confirmed(0, 0) == 3.0);
    CHECK(tail.day_labels == std::vector<std::string>{"4", "5"});
    CHECK(trailing_window(obs, 0).days() == 5);
    CHECK(trailing_window(obs, 9).days() == 5);
}
