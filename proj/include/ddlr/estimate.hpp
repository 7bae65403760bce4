#pragma once

// Controller-parameter estimation: filtered prediction-error norm and
// prediction-error/excitation correlation, each with a closed-form path for
// the linear predictor and a simplex path for the nonlinear one.

#include "ddlr/lti.hpp"
#include "ddlr/predict.hpp"
#include "ddlr/signals.hpp"
#include "ddlr/spectra.hpp"
#include "ddlr/virtual_signals.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace ddlr {

inline constexpr double kMaxNormalCondition = 1e12;
// M^T M for the stacked correlation system; only singularity to working
// precision is rejected here.
inline constexpr double kMaxCorrelationCondition = 1e15;

enum class Predictor { Linear, Nonlinear };
enum class Method { Norm, Correlation };

[[nodiscard]] std::string_view to_string(Predictor p);
[[nodiscard]] std::string_view to_string(Method m);

struct NoFilter {};
struct DesignedMagnitude {};

// What the user asks for.
using FilterPolicy = std::variant<NoFilter, TransferOperator, DesignedMagnitude>;
// What gets applied: nothing, a rational operator, or a zero-phase magnitude.
using Filter = std::variant<NoFilter, TransferOperator, FilterMagnitude>;

[[nodiscard]] Series apply_filter(const Filter& K, std::span<const double> x);
[[nodiscard]] std::string describe(const Filter& K);

// N x (2L+1), row t = [x(t+L) .. x(t) .. x(t-L)], zero outside the record.
using InstrumentMatrix = Eigen::MatrixXd;

struct LeastSquaresFit {
    Eigen::VectorXd rho;
    double condition = 0.0; // of the normal-equation matrix
};

// (1/N) sum eps^2
[[nodiscard]] double cost_pe(std::span<const double> eps);

// Minimizes ||u_bar_K - Phi_K rho|| by column-pivoted QR. The first skip_rows
// samples are left out of the sums. Throws IllConditionedError if the normal
// matrix condition reaches kMaxNormalCondition.
[[nodiscard]] LeastSquaresFit lsq_pe(const VirtualSignals& vs, std::size_t n_a, std::size_t n_b, const Filter& K,
                                     std::size_t skip_rows = 0);

[[nodiscard]] InstrumentMatrix build_instrument(std::span<const double> x, std::size_t lags);
[[nodiscard]] InstrumentMatrix build_instrument(const Dataset& d, std::size_t lags);

// (1/N) sum_t eps(t) zeta(t). Throws Error(DimensionMismatch).
[[nodiscard]] Eigen::VectorXd corr_vector(std::span<const double> eps, const InstrumentMatrix& Z);
// Same vector computed straight from the excitation with the lagged
// cross-correlation kernel, without materializing Z.
[[nodiscard]] Eigen::VectorXd corr_vector(std::span<const double> eps, std::span<const double> x, std::size_t lags);

// ||f||^2 / (2L+1)
[[nodiscard]] double cost_corr(const Eigen::VectorXd& f_hat);

// Least squares on the stacked instrument system M rho = g with
// M = (1/N) sum zeta phi_K^T and g = (1/N) sum zeta u_bar_K. Throws
// IllConditionedError once M^T M reaches kMaxCorrelationCondition.
[[nodiscard]] LeastSquaresFit lsq_corr(const VirtualSignals& vs, const InstrumentMatrix& Z, std::size_t n_a,
                                       std::size_t n_b, const Filter& K);
[[nodiscard]] LeastSquaresFit lsq_corr(const VirtualSignals& vs, std::span<const double> x, std::size_t lags,
                                       std::size_t n_a, std::size_t n_b, const Filter& K, std::size_t skip_rows = 0);

struct SimplexOptions {
    std::size_t max_iters = 1000;
    double diameter_tol = 1e-10;
};

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::vector<double> trace; // best value after each iteration
    bool converged = false;    // stopped on the diameter test
};

using CostFunction = std::function<double(const Eigen::VectorXd&)>;

// Nelder-Mead with reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
// The initial simplex perturbs each coordinate by 5% (0.00025 when zero).
// Non-finite costs away from x0 are treated as +inf. Throws
// Error(NonFiniteCost) if cost(x0) is not finite.
[[nodiscard]] SimplexResult simplex_minimize(const CostFunction& cost, const Eigen::VectorXd& x0,
                                             const SimplexOptions& options = {});

struct TuningConfig {
    Predictor predictor = Predictor::Linear;
    Method method = Method::Norm;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    TransferOperator Cf;
    TransferOperator Qd;
    FilterPolicy filter = NoFilter{};
    std::optional<std::size_t> lags; // required for Method::Correlation
    std::optional<Eigen::VectorXd> rho0; // required for Predictor::Nonlinear
    std::size_t max_simplex_iters = 1000;
    std::size_t simplex_restarts = 0; // extra runs from the best vertex, each with max_simplex_iters
    std::size_t filter_update_iters = 50;
    double filter_update_tol = 1e-8;
    Series disturbance; // d(t) for DesignedMagnitude
    std::size_t welch_segment = kDefaultWelchSegment;
    double welch_overlap = kDefaultWelchOverlap;
    std::size_t discard_prefix = 0;
    bool truncate_lag_rows = false; // drop the first max(n_a, n_b) rows from every sum
    std::optional<TransferOperator> validation_plant; // only for the stability flag
};

struct TuningDiagnostics {
    double condition = 0.0; // normal equations of the final closed-form solve (0 for simplex)
    std::string filter;
    std::size_t filter_iterations = 0;
    double max_abs_disturbance = 0.0;
    bool unstable_result = false; // closed loop with validation_plant unstable
    bool simplex_converged = false;
};

struct TuningResult {
    Eigen::VectorXd rho_hat;
    TransferOperator controller;
    double final_cost = 0.0;
    std::size_t iterations = 0;
    std::vector<double> cost_trace;
    TuningDiagnostics diagnostics;
};

// Throws Error(InvalidArgument) when the config is inconsistent with itself or
// the dataset, IllConditionedError from the closed-form solvers.
[[nodiscard]] TuningResult tune(const TuningConfig& cfg, const Dataset& d);

} // namespace ddlr
