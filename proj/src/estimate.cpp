#include "ddlr/estimate.hpp"

#include "ddlr/error.hpp"
#include "ddlr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ddlr {
namespace {

using Index = Eigen::Index;

std::span<const double> col_span(const Eigen::MatrixXd& m, Index j) {
    return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

// Squared ratio of extreme singular values, i.e. the condition of A^T A.
double normal_condition(const Eigen::MatrixXd& a) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double hi = s[0];
    const double lo = s[s.size() - 1];
    if (lo <= 0.0 || !std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    const double ratio = hi / lo;
    return ratio * ratio;
}

LeastSquaresFit solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const char* what, double limit) {
    if (!a.allFinite() || !b.allFinite()) {
        throw Error(ErrorKind::NonFiniteCost, std::string(what) + " system contains non-finite entries");
    }
    LeastSquaresFit fit;
    fit.condition = normal_condition(a);
    if (!(fit.condition < limit)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s normal equations have condition %.3e (limit %.0e)", what, fit.condition,
                      limit);
        throw IllConditionedError(fit.condition, buf);
    }
    fit.rho = a.colPivHouseholderQr().solve(b);
    return fit;
}

Eigen::MatrixXd filter_columns(const Filter& K, const Eigen::MatrixXd& m) {
    if (std::holds_alternative<NoFilter>(K)) return m;
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Index j = 0; j < m.cols(); ++j) {
        const Series f = apply_filter(K, col_span(m, j));
        out.col(j) = Eigen::Map<const Eigen::VectorXd>(f.data(), m.rows());
    }
    return out;
}

void zero_prefix(Eigen::MatrixXd& m, Eigen::VectorXd& v, std::size_t skip) {
    const auto rows = std::min<Index>(static_cast<Index>(skip), m.rows());
    m.topRows(rows).setZero();
    v.head(rows).setZero();
}

std::span<const double> aligned_excitation(const Dataset& d, const VirtualSignals& vs) {
    const Series& x = d.excitation();
    return std::span<const double>(x).subspan(vs.offset, vs.size());
}

double masked_cost_pe(std::span<const double> eps, std::size_t skip) {
    if (skip >= eps.size()) return std::numeric_limits<double>::infinity();
    return cost_pe(eps.subspan(skip));
}

double masked_cost_corr(Series eps, std::span<const double> x, std::size_t lags, std::size_t skip) {
    const std::size_t n = eps.size();
    if (skip >= n) return std::numeric_limits<double>::infinity();
    std::fill_n(eps.begin(), skip, 0.0);
    Eigen::VectorXd f = corr_vector(eps, x, lags);
    f *= static_cast<double>(n) / static_cast<double>(n - skip);
    return cost_corr(f);
}

FilterKind design_kind(Predictor p, Method m) {
    if (m == Method::Norm) return p == Predictor::Linear ? FilterKind::PeLin : FilterKind::PeNlin;
    return p == Predictor::Linear ? FilterKind::CorrLin : FilterKind::CorrNlin;
}

void validate(const TuningConfig& cfg, const Dataset& d) {
    const std::size_t p = cfg.n_a + cfg.n_b + 1;
    if (cfg.method == Method::Correlation && !cfg.lags) {
        throw Error(ErrorKind::InvalidArgument, "correlation method needs the number of lags L");
    }
    if (cfg.predictor == Predictor::Nonlinear && !cfg.rho0) {
        throw Error(ErrorKind::InvalidArgument, "nonlinear predictor needs an initial parameter vector rho0");
    }
    if (cfg.rho0 && static_cast<std::size_t>(cfg.rho0->size()) != p) {
        throw Error(ErrorKind::DimensionMismatch, "rho0 must have n_a + n_b + 1 = " + std::to_string(p) + " entries");
    }
    if (std::holds_alternative<DesignedMagnitude>(cfg.filter) && cfg.disturbance.empty()) {
        throw Error(ErrorKind::InvalidArgument, "designed filter needs the disturbance series d(t)");
    }
    if (cfg.discard_prefix >= d.size()) {
        throw Error(ErrorKind::TooFewSamples, "discard prefix leaves no samples");
    }
}

} // namespace

std::string_view to_string(Predictor p) { return p == Predictor::Linear ? "linear" : "nonlinear"; }

std::string_view to_string(Method m) { return m == Method::Norm ? "norm" : "correlation"; }

Series apply_filter(const Filter& K, std::span<const double> x) {
    if (const auto* op = std::get_if<TransferOperator>(&K)) return simulate(*op, x);
    if (const auto* mag = std::get_if<FilterMagnitude>(&K)) return apply_zero_phase(*mag, x);
    return Series(x.begin(), x.end());
}

std::string describe(const Filter& K) {
    if (const auto* op = std::get_if<TransferOperator>(&K)) {
        return "operator (num order " + std::to_string(op->num().size() - 1) + ", den order " +
               std::to_string(op->den().size() - 1) + ")";
    }
    if (const auto* mag = std::get_if<FilterMagnitude>(&K)) {
        return "designed magnitude (" + std::to_string(mag->grid.size()) + " bins)";
    }
    return "none";
}

double cost_pe(std::span<const double> eps) {
    if (eps.empty()) {
        throw Error(ErrorKind::TooFewSamples, "cost of an empty prediction error");
    }
    return kernels::sum_squares(eps) / static_cast<double>(eps.size());
}

LeastSquaresFit lsq_pe(const VirtualSignals& vs, std::size_t n_a, std::size_t n_b, const Filter& K,
                       std::size_t skip_rows) {
    Eigen::MatrixXd phi = filter_columns(K, build_regressor(vs, n_a, n_b));
    const Series uk = apply_filter(K, vs.u_bar);
    Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(uk.data(), static_cast<Index>(uk.size()));
    if (skip_rows > 0) {
        if (skip_rows + phi.cols() > static_cast<std::size_t>(phi.rows())) {
            throw Error(ErrorKind::TooFewSamples, "too few rows left after skipping lag rows");
        }
        const Index keep = phi.rows() - static_cast<Index>(skip_rows);
        phi = phi.bottomRows(keep).eval();
        target = target.tail(keep).eval();
    }
    return solve_checked(phi, target, "prediction-error", kMaxNormalCondition);
}

InstrumentMatrix build_instrument(std::span<const double> x, std::size_t lags) {
    const auto n = static_cast<Index>(x.size());
    const auto width = static_cast<Index>(2 * lags + 1);
    const auto L = static_cast<Index>(lags);
    InstrumentMatrix z = InstrumentMatrix::Zero(n, width);
    for (Index j = 0; j < width; ++j) {
        const Index shift = L - j; // column j holds x(t + L - j)
        for (Index t = 0; t < n; ++t) {
            const Index s = t + shift;
            if (s >= 0 && s < n) z(t, j) = x[static_cast<std::size_t>(s)];
        }
    }
    return z;
}

InstrumentMatrix build_instrument(const Dataset& d, std::size_t lags) { return build_instrument(d.excitation(), lags); }

Eigen::VectorXd corr_vector(std::span<const double> eps, const InstrumentMatrix& Z) {
    if (static_cast<Index>(eps.size()) != Z.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "prediction error and instrument matrix lengths differ");
    }
    if (eps.empty()) {
        throw Error(ErrorKind::TooFewSamples, "correlation of empty series");
    }
    const Eigen::Map<const Eigen::VectorXd> e(eps.data(), static_cast<Index>(eps.size()));
    return Z.transpose() * e / static_cast<double>(eps.size());
}

Eigen::VectorXd corr_vector(std::span<const double> eps, std::span<const double> x, std::size_t lags) {
    if (eps.size() != x.size()) {
        throw Error(ErrorKind::DimensionMismatch, "prediction error and excitation lengths differ");
    }
    if (eps.empty()) {
        throw Error(ErrorKind::TooFewSamples, "correlation of empty series");
    }
    Eigen::VectorXd f(static_cast<Index>(2 * lags + 1));
    kernels::lagged_xcorr(eps, x, lags, {f.data(), static_cast<std::size_t>(f.size())});
    return f / static_cast<double>(eps.size());
}

double cost_corr(const Eigen::VectorXd& f_hat) {
    if (f_hat.size() == 0) return 0.0;
    return f_hat.squaredNorm() / static_cast<double>(f_hat.size());
}

LeastSquaresFit lsq_corr(const VirtualSignals& vs, const InstrumentMatrix& Z, std::size_t n_a, std::size_t n_b,
                         const Filter& K) {
    const Eigen::MatrixXd phi = filter_columns(K, build_regressor(vs, n_a, n_b));
    const Series uk = apply_filter(K, vs.u_bar);
    if (Z.rows() != phi.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "instrument matrix and regressor lengths differ");
    }
    const double n = static_cast<double>(phi.rows());
    const Eigen::MatrixXd M = Z.transpose() * phi / n;
    const Eigen::VectorXd g =
        Z.transpose() * Eigen::Map<const Eigen::VectorXd>(uk.data(), static_cast<Index>(uk.size())) / n;
    return solve_checked(M, g, "correlation", kMaxCorrelationCondition);
}

LeastSquaresFit lsq_corr(const VirtualSignals& vs, std::span<const double> x, std::size_t lags, std::size_t n_a,
                         std::size_t n_b, const Filter& K, std::size_t skip_rows) {
    if (x.size() != vs.size()) {
        throw Error(ErrorKind::DimensionMismatch, "excitation and virtual signal lengths differ");
    }
    Eigen::MatrixXd phi = filter_columns(K, build_regressor(vs, n_a, n_b));
    const Series uk = apply_filter(K, vs.u_bar);
    Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(uk.data(), static_cast<Index>(uk.size()));
    if (skip_rows >= vs.size()) {
        throw Error(ErrorKind::TooFewSamples, "too few rows left after skipping lag rows");
    }
    zero_prefix(phi, target, skip_rows);

    const double scale = 1.0 / static_cast<double>(vs.size() - skip_rows);
    const auto width = static_cast<Index>(2 * lags + 1);
    Eigen::MatrixXd M(width, phi.cols());
    for (Index j = 0; j < phi.cols(); ++j) {
        kernels::lagged_xcorr(col_span(phi, j), x, lags, {M.col(j).data(), static_cast<std::size_t>(width)});
    }
    Eigen::VectorXd g(width);
    kernels::lagged_xcorr({target.data(), static_cast<std::size_t>(target.size())}, x, lags,
                          {g.data(), static_cast<std::size_t>(width)});
    M *= scale;
    g *= scale;
    return solve_checked(M, g, "correlation", kMaxCorrelationCondition);
}

TuningResult tune(const TuningConfig& cfg, const Dataset& d) {
    validate(cfg, d);
    const VirtualSignals vs = make_virtual(d, cfg.Qd, cfg.Cf, cfg.discard_prefix);
    const std::span<const double> x = aligned_excitation(d, vs);
    const std::size_t skip = cfg.truncate_lag_rows ? std::max(cfg.n_a, cfg.n_b) : 0;
    const std::size_t lags = cfg.lags.value_or(0);
    const ControllerSpec structure(cfg.n_a, cfg.n_b, cfg.Cf);
    const bool designed = std::holds_alternative<DesignedMagnitude>(cfg.filter);

    DesignSpectra spectra;
    if (designed) {
        const Series& y = d.y();
        const std::span<const double> y_used = std::span<const double>(y).subspan(vs.offset, vs.size());
        const FilterKind kind = design_kind(cfg.predictor, cfg.method);
        if (kind == FilterKind::PeLin || kind == FilterKind::PeNlin) {
            spectra.output_psd = welch_psd(y_used, cfg.welch_segment, cfg.welch_overlap);
            spectra.disturbance_psd = disturbance_psd(cfg.disturbance, spectra.output_psd->grid);
        } else {
            spectra.cross_psd = cross_psd(x, y_used, cfg.welch_segment, cfg.welch_overlap);
            spectra.disturbance_psd = disturbance_psd(cfg.disturbance, spectra.cross_psd->grid);
        }
    }
    auto make_filter = [&](const Poly& a_current) -> Filter {
        if (designed) return design_filter(design_kind(cfg.predictor, cfg.method), cfg.Qd, a_current, spectra);
        if (const auto* op = std::get_if<TransferOperator>(&cfg.filter)) return *op;
        return NoFilter{};
    };

    TuningResult result;
    result.diagnostics.max_abs_disturbance = vs.max_abs_disturbance();

    auto linear_cost = [&](const Filter& K, const Eigen::VectorXd& rho) {
        const Series eps = apply_filter(K, eps_linear(structure.with_rho(rho), vs));
        return cfg.method == Method::Norm ? masked_cost_pe(eps, skip) : masked_cost_corr(eps, x, lags, skip);
    };

    if (cfg.predictor == Predictor::Linear) {
        // Linear-predictor designs depend on A(q, rho): start from A = 1 and
        // redesign until the estimate settles.
        const bool iterate = designed && cfg.n_a > 0;
        Poly a_current{1.0};
        Eigen::VectorXd previous;
        Filter K;
        LeastSquaresFit fit;
        std::size_t rounds = 0;
        do {
            K = make_filter(a_current);
            fit = cfg.method == Method::Norm ? lsq_pe(vs, cfg.n_a, cfg.n_b, K, skip)
                                             : lsq_corr(vs, x, lags, cfg.n_a, cfg.n_b, K, skip);
            ++rounds;
            result.cost_trace.push_back(linear_cost(K, fit.rho));
            if (!iterate) break;
            const bool settled = previous.size() > 0 && (fit.rho - previous).norm() < cfg.filter_update_tol;
            previous = fit.rho;
            a_current = structure.with_rho(fit.rho).A();
            if (settled) break;
        } while (rounds < cfg.filter_update_iters);
        result.rho_hat = fit.rho;
        result.final_cost = result.cost_trace.back();
        result.iterations = rounds;
        result.diagnostics.condition = fit.condition;
        result.diagnostics.filter = describe(K);
        result.diagnostics.filter_iterations = rounds;
    } else {
        // Nonlinear-predictor designs carry no A(q, rho), so one design suffices.
        const Filter K = make_filter(Poly{1.0});
        auto cost = [&](const Eigen::VectorXd& rho) {
            const Series eps = apply_filter(K, eps_nonlinear(structure.with_rho(rho), vs));
            return cfg.method == Method::Norm ? masked_cost_pe(eps, skip) : masked_cost_corr(eps, x, lags, skip);
        };
        SimplexOptions options;
        options.max_iters = cfg.max_simplex_iters;
        SimplexResult sr = simplex_minimize(cost, *cfg.rho0, options);
        std::size_t iterations = sr.iterations;
        // A collapsed simplex in a flat valley gets a fresh one around its best vertex.
        for (std::size_t k = 0; k < cfg.simplex_restarts && sr.value > 0.0; ++k) {
            SimplexResult next = simplex_minimize(cost, sr.x, options);
            iterations += next.iterations;
            sr.trace.insert(sr.trace.end(), next.trace.begin(), next.trace.end());
            if (!(next.value < sr.value)) break;
            next.trace = std::move(sr.trace);
            sr = std::move(next);
        }
        result.rho_hat = sr.x;
        result.final_cost = sr.value;
        result.iterations = iterations;
        result.cost_trace = std::move(sr.trace);
        result.diagnostics.filter = describe(K);
        result.diagnostics.filter_iterations = 1;
        result.diagnostics.simplex_converged = sr.converged;
    }

    result.controller = structure.with_rho(result.rho_hat).realize();
    if (cfg.validation_plant) {
        try {
            const Sensitivities loop = closed_loop(*cfg.validation_plant, result.controller);
            result.diagnostics.unstable_result = !stability_report(loop.S).stable;
        } catch (const Error&) {
            result.diagnostics.unstable_result = true;
        }
    }
    return result;
}

} // namespace ddlr
