#include "ddlr/benchmark.hpp"

#include "ddlr/error.hpp"

namespace ddlr::bench {
namespace {

Poly delayed(Poly p, Realization r) {
    if (r == Realization::ZDomain) p.insert(p.begin(), 0.0);
    return p;
}

std::string cell_label(std::string_view study, ExperimentKind kind, Predictor p, Method m) {
    std::string label(study);
    label += '/';
    label += to_string(kind);
    label += '/';
    label += to_string(p);
    label += '/';
    label += to_string(m);
    return label;
}

std::vector<TuningCell> grid_of_cells(std::string_view study, const TuningConfig& base,
                                      const Eigen::VectorXd& rho0) {
    std::vector<TuningCell> cells;
    for (ExperimentKind kind : {ExperimentKind::OpenLoop, ExperimentKind::ClosedLoop}) {
        for (Predictor p : {Predictor::Linear, Predictor::Nonlinear}) {
            for (Method m : {Method::Norm, Method::Correlation}) {
                TuningCell cell;
                cell.label = cell_label(study, kind, p, m);
                cell.experiment = kind;
                cell.tuning = base;
                cell.tuning.predictor = p;
                cell.tuning.method = m;
                if (m == Method::Correlation) cell.tuning.lags = kLags;
                if (p == Predictor::Nonlinear) cell.tuning.rho0 = rho0;
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

TuningConfig structure_config(Realization r, const Structure& s) {
    TuningConfig cfg;
    cfg.n_a = s.n_a;
    cfg.n_b = s.n_b;
    cfg.Cf = s.Cf;
    cfg.Qd = reference_model(r);
    cfg.max_simplex_iters = kSimplexIters;
    cfg.validation_plant = plant(r);
    return cfg;
}

} // namespace

std::string_view to_string(Realization r) { return r == Realization::AsPrinted ? "as-printed" : "z-domain"; }

TransferOperator plant(Realization r) {
    return TransferOperator(delayed(poly::scale(Poly{1.0, -0.7}, 1.0 / 120.0), r), Poly{1.0, -1.9, 0.9025});
}

TransferOperator reference_model(Realization r) {
    const Poly num = poly::scale(poly::mul(Poly{1.0, -0.7}, Poly{1.0, -1.0}), 1.0 / 120.0);
    const Poly den = poly::mul(Poly{1.0, -0.9}, Poly{1.0, -1.9, 0.9025});
    return TransferOperator(delayed(num, r), den);
}

TransferOperator integrator() { return TransferOperator({1.0}, {1.0, -1.0}); }

Structure pidf() { return {1, 3, integrator()}; }

Structure pi() { return {0, 1, integrator()}; }

Eigen::VectorXd ideal_rho(Realization r) {
    Eigen::VectorXd rho(5);
    if (r == Realization::AsPrinted) {
        rho << -0.7, 0.0, 12.0, -22.8, 10.83;
    } else {
        rho << -0.7, 12.0, -22.8, 10.83, 0.0;
    }
    return rho;
}

TransferOperator initial_controller(Realization r) {
    const Structure s = pidf();
    return ControllerSpec(s.n_a, s.n_b, s.Cf, 0.5 * ideal_rho(r)).realize();
}

Eigen::VectorXd pi_rho0() { return pi_rho(1.0, 0.9); }

Eigen::VectorXd pi_rho(double gain, double zero) {
    Eigen::VectorXd rho(2);
    rho << gain, -gain * zero;
    return rho;
}

std::pair<double, double> pi_gain_zero(const Eigen::VectorXd& rho) {
    if (rho.size() != 2) {
        throw Error(ErrorKind::DimensionMismatch, "PI parameter vector has 2 entries");
    }
    return {rho[0], rho[0] != 0.0 ? -rho[1] / rho[0] : 0.0};
}

ExperimentConfig experiment(Realization r, ExperimentKind kind, double noise_variance, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.plant = plant(r);
    cfg.mode = kind;
    cfg.initial_controller = initial_controller(r);
    cfg.excitation = SquareWave{kPeriod, 1.0, kSamples};
    cfg.noise_variance = noise_variance;
    cfg.seed = seed;
    return cfg;
}

std::vector<TuningCell> matching_cells(Realization r, MatchingFilter filter) {
    TuningConfig base = structure_config(r, pidf());
    std::string study = "matching/none";
    if (filter == MatchingFilter::ReferenceModel) {
        base.filter = reference_model(r);
        study = "matching/qd";
    }
    return grid_of_cells(study, base, 0.5 * ideal_rho(r));
}

std::vector<TuningCell> mismatching_cells(Realization r) {
    TuningConfig base = structure_config(r, pi());
    base.filter = DesignedMagnitude{};
    base.disturbance = step_disturbance(kHorizon);
    return grid_of_cells("mismatching/designed", base, pi_rho0());
}

std::vector<TuningCell> mismatching_cells_unfiltered(Realization r) {
    return grid_of_cells("mismatching/none", structure_config(r, pi()), pi_rho0());
}

MonteCarloConfig monte_carlo_config(Realization r, std::vector<TuningCell> cells, std::size_t runs,
                                    std::uint64_t base_seed, double noise_variance) {
    MonteCarloConfig cfg;
    cfg.base = experiment(r, ExperimentKind::OpenLoop, noise_variance, base_seed);
    cfg.cells = std::move(cells);
    cfg.runs = runs;
    cfg.Qd = reference_model(r);
    cfg.disturbance = step_disturbance(kHorizon);
    cfg.horizon = kHorizon;
    return cfg;
}

EvaluationScenario scenario(Realization r, const TransferOperator& controller) {
    return {plant(r), reference_model(r), step_disturbance(kHorizon), kHorizon, controller};
}

} // namespace ddlr::bench
