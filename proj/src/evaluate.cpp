#include "ddlr/evaluate.hpp"

#include "ddlr/error.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

namespace ddlr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
    }
}

void summarize(CellSummary& cell) {
    double sum = 0.0;
    std::size_t finite = 0;
    cell.unstable_count = 0;
    for (const auto& o : cell.outcomes) {
        if (o.failed || !std::isfinite(o.cost)) {
            ++cell.unstable_count;
            continue;
        }
        sum += o.cost;
        ++finite;
    }
    cell.runs = cell.outcomes.size();
    if (finite == 0) {
        cell.mean = kInf;
        cell.stddev = kInf;
        return;
    }
    cell.mean = sum / static_cast<double>(finite);
    double ss = 0.0;
    for (const auto& o : cell.outcomes) {
        if (o.failed || !std::isfinite(o.cost)) continue;
        ss += (o.cost - cell.mean) * (o.cost - cell.mean);
    }
    cell.stddev = finite > 1 ? std::sqrt(ss / static_cast<double>(finite - 1)) : 0.0;
}

} // namespace

TransferOperator ideal_controller(const TransferOperator& G, const TransferOperator& Qd) {
    return tf_sub(tf_inv(Qd), tf_inv(G));
}

Series step_disturbance(std::size_t n) { return Series(n, 1.0); }

DisturbanceCost evaluate_disturbance(const EvaluationScenario& s) {
    if (s.horizon == 0) {
        throw Error(ErrorKind::InvalidArgument, "horizon must be at least 1");
    }
    if (s.disturbance.size() < s.horizon) {
        throw Error(ErrorKind::InvalidArgument, "disturbance shorter than the horizon");
    }
    const Sensitivities loop = closed_loop(s.plant, s.controller);
    if (!stability_report(loop.S).stable) {
        return {kInf, true};
    }
    const std::span<const double> d(s.disturbance.data(), s.horizon);
    const Series desired = simulate(s.Qd, d);
    const Series achieved = simulate(loop.Q, d);
    double acc = 0.0;
    for (std::size_t t = 0; t < s.horizon; ++t) {
        const double e = desired[t] - achieved[t];
        acc += e * e;
    }
    const double value = acc / static_cast<double>(s.horizon);
    if (!std::isfinite(value)) return {kInf, true};
    return {value, false};
}

double disturbance_cost(const EvaluationScenario& s) { return evaluate_disturbance(s).value; }

OracleResult optimal_controller_oracle(const TransferOperator& G, const TransferOperator& Qd,
                                       const ControllerSpec& structure, const Series& d, const Eigen::VectorXd& rho0,
                                       const OracleOptions& options) {
    OracleResult result;
    EvaluationScenario s{G, Qd, d, options.horizon, TransferOperator{}};
    auto cost = [&](const Eigen::VectorXd& rho) {
        ++result.evaluations;
        s.controller = structure.with_rho(rho).realize();
        try {
            return disturbance_cost(s);
        } catch (const Error&) {
            return kInf;
        }
    };
    SimplexOptions simplex;
    simplex.max_iters = options.max_iters;
    SimplexResult best = simplex_minimize(cost, rho0, simplex);
    for (std::size_t k = 0; k < options.restarts; ++k) {
        SimplexResult next = simplex_minimize(cost, best.x, simplex);
        const bool improved = next.value < best.value;
        if (improved) best = std::move(next);
        if (!improved || best.value == 0.0) break;
    }
    result.rho = best.x;
    result.cost = best.value;
    return result;
}

std::string_view to_string(ExperimentKind kind) { return kind == ExperimentKind::OpenLoop ? "ol" : "cl"; }

MonteCarloSummary monte_carlo(const MonteCarloConfig& cfg) {
    if (cfg.runs == 0) {
        throw Error(ErrorKind::InvalidArgument, "Monte Carlo needs at least one run");
    }
    bool needs_ol = false;
    bool needs_cl = false;
    for (const auto& cell : cfg.cells) {
        (cell.experiment == ExperimentKind::OpenLoop ? needs_ol : needs_cl) = true;
    }
    if (needs_cl && !cfg.base.initial_controller) {
        throw Error(ErrorKind::InvalidArgument, "closed-loop cells need an initial controller");
    }

    MonteCarloSummary summary;
    summary.base_seed = cfg.base.seed;
    summary.runs = cfg.runs;
    summary.cells.resize(cfg.cells.size());
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
        auto& out = summary.cells[c];
        out.label = cfg.cells[c].label;
        out.experiment = cfg.cells[c].experiment;
        out.predictor = cfg.cells[c].tuning.predictor;
        out.method = cfg.cells[c].tuning.method;
        out.outcomes.resize(cfg.runs);
    }

    auto run_one = [&](std::size_t run) {
        std::optional<Dataset> ol;
        std::optional<Dataset> cl;
        std::string data_error;
        try {
            ExperimentConfig e = cfg.base;
            e.seed = run_seed(cfg.base.seed, run);
            if (needs_ol) {
                e.mode = ExperimentKind::OpenLoop;
                ol = run_experiment(e);
            }
            if (needs_cl) {
                e.mode = ExperimentKind::ClosedLoop;
                cl = run_experiment(e);
            }
        } catch (const std::exception& ex) {
            data_error = ex.what();
        }
        for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
            const TuningCell& cell = cfg.cells[c];
            RunOutcome& outcome = summary.cells[c].outcomes[run];
            const std::optional<Dataset>& data = cell.experiment == ExperimentKind::OpenLoop ? ol : cl;
            if (!data) {
                outcome = {kInf, true, "experiment failed: " + data_error, {}};
                continue;
            }
            try {
                const TuningResult tuned = tune(cell.tuning, *data);
                outcome.rho = tuned.rho_hat;
                const EvaluationScenario s{cfg.base.plant, cfg.Qd, cfg.disturbance, cfg.horizon, tuned.controller};
                const DisturbanceCost dc = evaluate_disturbance(s);
                outcome.cost = dc.value;
                outcome.failed = dc.unstable;
                if (dc.unstable) outcome.message = "closed loop with tuned controller is unstable";
            } catch (const std::exception& ex) {
                outcome.cost = kInf;
                outcome.failed = true;
                outcome.message = ex.what();
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cfg.runs));
    if (jobs == 1) {
        for (std::size_t run = 0; run < cfg.runs; ++run) run_one(run);
    } else {
        // Each run writes only its own slots, so no locking is needed.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) {
            workers.emplace_back([&] {
                for (std::size_t run = next++; run < cfg.runs; run = next++) run_one(run);
            });
        }
        for (auto& w : workers) w.join();
    }
    for (auto& cell : summary.cells) summarize(cell);
    return summary;
}

void write_summary_csv(const MonteCarloSummary& s, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "experiment,predictor,method,mean,std,runs,unstable_count,label\n";
    for (const auto& c : s.cells) {
        out << to_string(c.experiment) << ',' << to_string(c.predictor) << ',' << to_string(c.method) << ','
            << format_double(c.mean) << ',' << format_double(c.stddev) << ',' << c.runs << ',' << c.unstable_count
            << ',' << c.label << '\n';
    }
    finish_write(out, path);
}

void write_runs_csv(const MonteCarloSummary& s, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "run,seed,label,experiment,predictor,method,cost\n";
    for (std::size_t run = 0; run < s.runs; ++run) {
        for (const auto& c : s.cells) {
            out << run << ',' << run_seed(s.base_seed, run) << ',' << c.label << ',' << to_string(c.experiment) << ','
                << to_string(c.predictor) << ',' << to_string(c.method) << ',' << format_double(c.outcomes[run].cost)
                << '\n';
        }
    }
    finish_write(out, path);
}

nlohmann::json to_json(const MonteCarloSummary& s) {
    nlohmann::json j;
    j["base_seed"] = s.base_seed;
    j["runs"] = s.runs;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : s.cells) {
        nlohmann::json cell;
        cell["label"] = c.label;
        cell["experiment"] = to_string(c.experiment);
        cell["predictor"] = to_string(c.predictor);
        cell["method"] = to_string(c.method);
        // Infinite values are not representable in JSON; keep them as text.
        cell["mean"] = std::isfinite(c.mean) ? nlohmann::json(c.mean) : nlohmann::json(format_double(c.mean));
        cell["std"] =
            std::isfinite(c.stddev) ? nlohmann::json(c.stddev) : nlohmann::json(format_double(c.stddev));
        cell["runs"] = c.runs;
        cell["unstable_count"] = c.unstable_count;
        auto& costs = cell["costs"] = nlohmann::json::array();
        auto& failures = cell["failures"] = nlohmann::json::array();
        for (std::size_t run = 0; run < c.outcomes.size(); ++run) {
            const auto& o = c.outcomes[run];
            costs.push_back(std::isfinite(o.cost) ? nlohmann::json(o.cost) : nlohmann::json(format_double(o.cost)));
            if (o.failed) failures.push_back({{"run", run}, {"message", o.message}});
        }
        j["cells"].push_back(std::move(cell));
    }
    return j;
}

} // namespace ddlr
