#include "support.hpp"

#include "ddlr/benchmark.hpp"
#include "ddlr/error.hpp"
#include "ddlr/estimate.hpp"
#include "ddlr/predict.hpp"
#include "ddlr/virtual_signals.hpp"

#include <random>

using namespace ddlr;
using ddlr::test::inf_norm;
using ddlr::test::vec;
using bench::Realization;

namespace {

Series randn(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Series s(n);
    for (auto& v : s) v = d(rng);
    return s;
}

// Virtual signals whose linear prediction error is exactly zero at rho.
VirtualSignals exact_model(const ControllerSpec& spec, std::size_t n) {
    VirtualSignals vs;
    vs.ef_bar = randn(5, n);
    vs.e_bar = vs.ef_bar;
    vs.u_bar = simulate(spec.identified(), vs.ef_bar);
    vs.d_bar = Series(n, 0.0);
    return vs;
}

TuningConfig matching(Predictor p, Method m) {
    const auto s = bench::pidf();
    TuningConfig cfg;
    cfg.predictor = p;
    cfg.method = m;
    cfg.n_a = s.n_a;
    cfg.n_b = s.n_b;
    cfg.Cf = s.Cf;
    cfg.Qd = bench::reference_model(Realization::AsPrinted);
    if (m == Method::Correlation) cfg.lags = bench::kLags;
    if (p == Predictor::Nonlinear) cfg.rho0 = 0.5 * bench::ideal_rho(Realization::AsPrinted);
    return cfg;
}

} // namespace

TEST_CASE("costs") {
    CHECK(cost_pe(Series(5, 0.0)) == 0.0);
    CHECK(cost_pe(Series{1.0, -1.0}) == 1.0);
    CHECK(cost_corr(Eigen::VectorXd::Zero(3)) == 0.0);
    CHECK(cost_corr(vec({1.0, 1.0, 1.0})) == 1.0);
}

TEST_CASE("instrument matrix") {
    const Series x{1.0, 2.0, 3.0};
    const InstrumentMatrix Z = build_instrument(x, 1);
    Eigen::MatrixXd want(3, 3);
    want << 2, 1, 0, 3, 2, 1, 0, 3, 2;
    CHECK((Z - want).cwiseAbs().maxCoeff() == 0.0);
    const InstrumentMatrix Z0 = build_instrument(x, 0);
    REQUIRE(Z0.cols() == 1);
    CHECK(Z0(2, 0) == 3.0);
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1));
    CHECK(build_instrument(d, bench::kLags).cols() == 371);
}

TEST_CASE("correlation vector") {
    const Series x = randn(1, 400);
    const Series e = randn(2, 400);
    SUBCASE("zero error") {
        CHECK(corr_vector(Series(400, 0.0), x, 3).isZero());
    }
    SUBCASE("no lags is the normalized inner product") {
        double ip = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) ip += x[i] * e[i];
        const Eigen::VectorXd f = corr_vector(e, x, 0);
        REQUIRE(f.size() == 1);
        CHECK(f[0] == doctest::Approx(ip / 400.0).epsilon(1e-12));
    }
    SUBCASE("kernel path equals the materialized instrument") {
        const Eigen::VectorXd a = corr_vector(e, build_instrument(x, 17));
        const Eigen::VectorXd b = corr_vector(e, x, 17);
        CHECK(inf_norm(a, b) < 1e-13);
    }
    SUBCASE("white input against itself") {
        const Series w = randn(3, 20000);
        const Eigen::VectorXd f = corr_vector(w, w, 5);
        const double tol = 3.0 / std::sqrt(20000.0);
        CHECK(std::abs(f[5] - 1.0) < 0.05);
        for (Eigen::Index j = 0; j < f.size(); ++j) {
            if (j != 5) CHECK(std::abs(f[j]) < tol);
        }
    }
    CHECK_THROWS_AS((void)corr_vector(Series(3, 0.0), build_instrument(x, 1)), Error);
}

TEST_CASE("closed-form prediction-error fit") {
    SUBCASE("exact linear model") {
        const ControllerSpec spec(1, 2, TransferOperator::identity(), vec({-0.4, 1.3, -0.2, 0.6}));
        const auto vs = exact_model(spec, 500);
        const LeastSquaresFit fit = lsq_pe(vs, 1, 2, NoFilter{});
        CHECK(inf_norm(fit.rho, spec.rho()) < 1e-9);
        CHECK(fit.condition >= 1.0);
    }
    SUBCASE("benchmark noiseless data give the ideal parameters") {
        const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1));
        const auto s = bench::pidf();
        const auto vs = make_virtual(d, bench::reference_model(Realization::AsPrinted), s.Cf);
        const LeastSquaresFit fit = lsq_pe(vs, s.n_a, s.n_b, NoFilter{});
        CHECK(inf_norm(fit.rho, bench::ideal_rho(Realization::AsPrinted)) < 1e-6);
    }
    SUBCASE("collinear regressors are rejected") {
        VirtualSignals vs;
        vs.ef_bar = Series(50, 1.0);
        vs.e_bar = vs.ef_bar;
        vs.u_bar = Series(50, 2.0);
        vs.d_bar = Series(50, 0.0);
        // a constant ef_bar makes its lags identical after the first row
        try {
            (void)lsq_pe(vs, 0, 1, NoFilter{}, 1);
            FAIL("expected IllConditioned");
        } catch (const IllConditionedError& e) {
            CHECK(e.condition() >= kMaxNormalCondition);
        }
    }
}

TEST_CASE("closed-form correlation fit") {
    SUBCASE("exact linear model") {
        const ControllerSpec spec(1, 1, TransferOperator::identity(), vec({0.3, 2.0, -1.0}));
        const auto vs = exact_model(spec, 600);
        const LeastSquaresFit fit = lsq_corr(vs, vs.ef_bar, 8, 1, 1, NoFilter{});
        CHECK(inf_norm(fit.rho, spec.rho()) < 1e-9);
        const LeastSquaresFit same = lsq_corr(vs, build_instrument(vs.ef_bar, 8), 1, 1, NoFilter{});
        CHECK(inf_norm(fit.rho, same.rho) < 1e-9);
    }
    SUBCASE("benchmark noiseless data give the ideal parameters") {
        const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0, 1));
        const TuningResult res = tune(matching(Predictor::Linear, Method::Correlation), d);
        CHECK(inf_norm(res.rho_hat, bench::ideal_rho(Realization::AsPrinted)) < 1e-6);
        CHECK(res.diagnostics.condition < kMaxCorrelationCondition);
    }
}

TEST_CASE("simplex") {
    SUBCASE("convex quadratic") {
        const Eigen::VectorXd c = vec({1.0, -2.0, 0.5});
        const auto r = simplex_minimize([&](const Eigen::VectorXd& x) { return (x - c).squaredNorm(); },
                                        vec({1.2, -1.7, 0.4}));
        CHECK(inf_norm(r.x, c) < 1e-6);
        CHECK(r.converged);
        CHECK(r.trace.size() == r.iterations);
    }
    SUBCASE("Rosenbrock") {
        auto rosen = [](const Eigen::VectorXd& x) {
            return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        };
        SimplexOptions opt;
        opt.max_iters = 2000;
        const auto r = simplex_minimize(rosen, vec({-1.2, 1.0}), opt);
        CHECK(inf_norm(r.x, vec({1.0, 1.0})) < 1e-3);
        CHECK(r.iterations <= 2000);
    }
    SUBCASE("iteration cap") {
        SimplexOptions opt;
        opt.max_iters = 7;
        const auto r = simplex_minimize([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, vec({3.0, 4.0}), opt);
        CHECK(r.iterations == 7);
        CHECK_FALSE(r.converged);
    }
    SUBCASE("non-finite costs") {
        CHECK_THROWS_AS((void)simplex_minimize([](const Eigen::VectorXd&) { return std::nan(""); }, vec({1.0})), Error);
        // walls of NaN are treated as +inf and avoided
        const auto r = simplex_minimize(
            [](const Eigen::VectorXd& x) { return x[0] < 0.5 ? std::nan("") : (x[0] - 1.0) * (x[0] - 1.0); },
            vec({2.0}));
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("tuning recovers the ideal parameters on noiseless matching data") {
    const Eigen::VectorXd rho_d = bench::ideal_rho(Realization::AsPrinted);
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1));
    for (Method m : {Method::Norm, Method::Correlation}) {
        const TuningResult lin = tune(matching(Predictor::Linear, m), d);
        CHECK(inf_norm(lin.rho_hat, rho_d) < 1e-6);
        CHECK(lin.final_cost < 1e-10);
        TuningConfig cfg = matching(Predictor::Nonlinear, m);
        cfg.simplex_restarts = 5;
        const TuningResult nl = tune(cfg, d);
        CHECK(inf_norm(nl.rho_hat, rho_d) < 1e-4);
        CHECK(rational_equal(nl.controller, ControllerSpec(1, 3, bench::integrator(), nl.rho_hat).realize()));
    }
}

TEST_CASE("cost at the ideal parameters is zero for any filter") {
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::ClosedLoop, 0.0, 1));
    const auto Qd = bench::reference_model(Realization::AsPrinted);
    for (const FilterPolicy& f : {FilterPolicy{NoFilter{}}, FilterPolicy{Qd}}) {
        TuningConfig cfg = matching(Predictor::Nonlinear, Method::Norm);
        cfg.filter = f;
        cfg.rho0 = bench::ideal_rho(Realization::AsPrinted);
        cfg.max_simplex_iters = 0;
        CHECK(tune(cfg, d).final_cost < 1e-10);
    }
}

TEST_CASE("linear and nonlinear predictors agree without A") {
    const auto cells = bench::mismatching_cells(Realization::AsPrinted);
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0025, 4));
    // cells come as (linear, nonlinear) pairs per experiment and method
    for (const auto& cell : cells) {
        if (cell.experiment != ExperimentKind::OpenLoop || cell.tuning.predictor != Predictor::Linear) continue;
        TuningConfig nl = cell.tuning;
        nl.predictor = Predictor::Nonlinear;
        nl.rho0 = bench::pi_rho0();
        const TuningResult a = tune(cell.tuning, d);
        const TuningResult b = tune(nl, d);
        CHECK(inf_norm(a.rho_hat, b.rho_hat) < 1e-4);
    }
}

TEST_CASE("configuration errors") {
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1));
    TuningConfig no_lags = matching(Predictor::Linear, Method::Correlation);
    no_lags.lags.reset();
    CHECK_THROWS_AS((void)tune(no_lags, d), Error);
    TuningConfig no_start = matching(Predictor::Nonlinear, Method::Norm);
    no_start.rho0.reset();
    CHECK_THROWS_AS((void)tune(no_start, d), Error);
    TuningConfig wrong_start = matching(Predictor::Nonlinear, Method::Norm);
    wrong_start.rho0 = vec({1.0});
    CHECK_THROWS_AS((void)tune(wrong_start, d), Error);
    TuningConfig designed = matching(Predictor::Linear, Method::Norm);
    designed.filter = DesignedMagnitude{};
    CHECK_THROWS_AS((void)tune(designed, d), Error); // no disturbance given
}

TEST_CASE("unstable result flag") {
    const Dataset d = run_experiment(bench::experiment(Realization::AsPrinted, ExperimentKind::OpenLoop, 0.0, 1));
    TuningConfig cfg = matching(Predictor::Nonlinear, Method::Norm);
    cfg.rho0 = vec({0.0, -50.0, 0.0, 0.0, 0.0});
    cfg.max_simplex_iters = 0;
    cfg.validation_plant = bench::plant(Realization::AsPrinted);
    CHECK(tune(cfg, d).diagnostics.unstable_result);
    cfg.rho0 = bench::ideal_rho(Realization::AsPrinted);
    CHECK_FALSE(tune(cfg, d).diagnostics.unstable_result);
}
