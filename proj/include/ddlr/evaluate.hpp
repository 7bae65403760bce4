#pragma once

// Ground truth that needs the plant: ideal controller, disturbance-response
// cost, a brute-force optimal-controller oracle and the Monte Carlo harness.
// Nothing here is used by tune().

#include "ddlr/estimate.hpp"
#include "ddlr/lti.hpp"
#include "ddlr/predict.hpp"
#include "ddlr/signals.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddlr {

inline constexpr std::size_t kDefaultHorizon = 150;

// Cd = Qd^-1 - G^-1. Throws Error(NonInvertible).
[[nodiscard]] TransferOperator ideal_controller(const TransferOperator& G, const TransferOperator& Qd);

// Unit step of n samples.
[[nodiscard]] Series step_disturbance(std::size_t n);

struct EvaluationScenario {
    TransferOperator plant;
    TransferOperator Qd;
    Series disturbance = step_disturbance(kDefaultHorizon);
    std::size_t horizon = kDefaultHorizon;
    TransferOperator controller;
};

struct DisturbanceCost {
    double value = 0.0; // +inf when unstable
    bool unstable = false;
};

// (1/h) sum_{t<h} [(Qd - Q) d](t)^2. Unstable loops give +inf with the flag
// set. Throws Error(DegenerateLoop), Error(InvalidArgument) on a bad horizon.
[[nodiscard]] DisturbanceCost evaluate_disturbance(const EvaluationScenario& s);
[[nodiscard]] double disturbance_cost(const EvaluationScenario& s);

struct OracleOptions {
    std::size_t horizon = kDefaultHorizon;
    std::size_t max_iters = 5000;
    std::size_t restarts = 5; // simplex restarted from its own result
};

struct OracleResult {
    Eigen::VectorXd rho;
    double cost = 0.0;
    std::size_t evaluations = 0;
};

// Minimizes the disturbance cost over a controller structure directly.
[[nodiscard]] OracleResult optimal_controller_oracle(const TransferOperator& G, const TransferOperator& Qd,
                                                     const ControllerSpec& structure, const Series& d,
                                                     const Eigen::VectorXd& rho0, const OracleOptions& options = {});

struct TuningCell {
    std::string label;
    ExperimentKind experiment = ExperimentKind::OpenLoop;
    TuningConfig tuning;
};

struct MonteCarloConfig {
    ExperimentConfig base; // seed is the base seed; mode is taken from each cell
    std::vector<TuningCell> cells;
    std::size_t runs = 20;
    TransferOperator Qd;       // for the disturbance cost
    Series disturbance = step_disturbance(kDefaultHorizon);
    std::size_t horizon = kDefaultHorizon;
    std::size_t jobs = 1;
};

struct RunOutcome {
    double cost = 0.0;
    bool failed = false; // unstable loop or tuning error; cost is +inf
    std::string message;
    Eigen::VectorXd rho;
};

struct CellSummary {
    std::string label;
    ExperimentKind experiment = ExperimentKind::OpenLoop;
    Predictor predictor = Predictor::Linear;
    Method method = Method::Norm;
    double mean = 0.0; // over finite runs
    double stddev = 0.0; // sample (n - 1) standard deviation over finite runs
    std::size_t runs = 0;
    std::size_t unstable_count = 0;
    std::vector<RunOutcome> outcomes; // indexed by run
};

struct MonteCarloSummary {
    std::uint64_t base_seed = 0;
    std::size_t runs = 0;
    std::vector<CellSummary> cells;
};

// Run i uses run_seed(base.seed, i) for both experiment kinds. Per-run
// failures are recorded, never thrown. Results do not depend on jobs.
[[nodiscard]] MonteCarloSummary monte_carlo(const MonteCarloConfig& cfg);

[[nodiscard]] std::string_view to_string(ExperimentKind kind);

// Columns: experiment,predictor,method,mean,std,runs,unstable_count,label
void write_summary_csv(const MonteCarloSummary& s, const std::filesystem::path& path);
// Columns: run,seed,label,experiment,predictor,method,cost
void write_runs_csv(const MonteCarloSummary& s, const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const MonteCarloSummary& s);

} // namespace ddlr
