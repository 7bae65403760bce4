#pragma once

// The reference benchmark: a second-order plant with a double pole at 0.95,
// a load-disturbance reference model with integral action, PIDF and PI
// controller structures, a square-wave probing experiment and Monte Carlo
// cells for the matching and mismatching studies.
//
// Two realizations of the same transfer functions are provided. AsPrinted
// reads the coefficients as polynomials in q^-1 starting at q^0. ZDomain
// reads them as polynomials in z, which adds one sample of delay to both the
// plant and the reference model.

#include "ddlr/estimate.hpp"
#include "ddlr/evaluate.hpp"
#include "ddlr/lti.hpp"
#include "ddlr/signals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace ddlr::bench {

enum class Realization { AsPrinted, ZDomain };

[[nodiscard]] std::string_view to_string(Realization r);

inline constexpr std::size_t kSamples = 3000;
inline constexpr std::size_t kPeriod = 300;
inline constexpr std::size_t kLags = 185;
inline constexpr std::size_t kHorizon = 150;
inline constexpr double kNoiseVariance = 0.0025;
inline constexpr std::size_t kSimplexIters = 1000;

// Optimal PI reported for the benchmark: gain * (1 - zero q^-1) / (1 - q^-1).
inline constexpr double kReferencePiGain = 4.1381;
inline constexpr double kReferencePiZero = 0.9788;

struct Structure {
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    TransferOperator Cf;
};

// G = (1/120)(1 - 0.7 q^-1) / (1 - 0.95 q^-1)^2
[[nodiscard]] TransferOperator plant(Realization r);
// Qd = (1/120)(1 - 0.7 q^-1)(1 - q^-1) / ((1 - 0.9 q^-1)(1 - 0.95 q^-1)^2)
[[nodiscard]] TransferOperator reference_model(Realization r);
// 1 / (1 - q^-1)
[[nodiscard]] TransferOperator integrator();

// n_a = 1, n_b = 3 with integral action.
[[nodiscard]] Structure pidf();
// n_a = 0, n_b = 1 with integral action.
[[nodiscard]] Structure pi();

// Parameters of the ideal controller in the PIDF structure.
[[nodiscard]] Eigen::VectorXd ideal_rho(Realization r);
// PIDF with half the ideal parameters; used for closed-loop experiments and as
// the simplex start in the matching study.
[[nodiscard]] TransferOperator initial_controller(Realization r);
// Simplex start for the PI structure.
[[nodiscard]] Eigen::VectorXd pi_rho0();
// [b0, b1] of gain * (1 - zero q^-1).
[[nodiscard]] Eigen::VectorXd pi_rho(double gain, double zero);
// (gain, zero) of a PI parameter vector.
[[nodiscard]] std::pair<double, double> pi_gain_zero(const Eigen::VectorXd& rho);

// Square wave of kSamples samples, period kPeriod, levels +-1.
[[nodiscard]] ExperimentConfig experiment(Realization r, ExperimentKind kind, double noise_variance,
                                          std::uint64_t seed);

enum class MatchingFilter { None, ReferenceModel };

// The 8 matching cells (2 experiments x 2 predictors x 2 methods).
[[nodiscard]] std::vector<TuningCell> matching_cells(Realization r, MatchingFilter filter);
// The 8 mismatching cells with designed filters.
[[nodiscard]] std::vector<TuningCell> mismatching_cells(Realization r);
// Same cells without any filter.
[[nodiscard]] std::vector<TuningCell> mismatching_cells_unfiltered(Realization r);

[[nodiscard]] MonteCarloConfig monte_carlo_config(Realization r, std::vector<TuningCell> cells, std::size_t runs,
                                                  std::uint64_t base_seed, double noise_variance = kNoiseVariance);

[[nodiscard]] EvaluationScenario scenario(Realization r, const TransferOperator& controller);

} // namespace ddlr::bench
