#include "ddlr/cli.hpp"

#include "ddlr/error.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ddlr::cli {
namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

nlohmann::json number_json(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

Poly poly_from_json(const nlohmann::json& j, const std::filesystem::path& path, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw Error(ErrorKind::ParseError, path.string() + ": controller." + key + " must be a list of numbers");
    }
    Poly p;
    for (const auto& v : j[key]) {
        if (!v.is_number()) {
            throw Error(ErrorKind::ParseError, path.string() + ": controller." + key + " must be a list of numbers");
        }
        p.push_back(v.get<double>());
    }
    return p;
}

// Accepts the output of `tune` ({"controller": {...}}) or a bare {num, den}.
TransferOperator controller_from_file(const std::filesystem::path& path) {
    const nlohmann::json root = read_json(path);
    const nlohmann::json& c = root.contains("controller") ? root["controller"] : root;
    if (!c.is_object()) throw Error(ErrorKind::ParseError, path.string() + ": expected a controller object");
    const int lead = c.contains("lead") && c["lead"].is_number_integer() ? c["lead"].get<int>() : 0;
    return TransferOperator(poly_from_json(c, path, "num"), poly_from_json(c, path, "den"), lead);
}

template <typename T>
const T& need(const std::optional<T>& v, const char* what, const JobConfig& job) {
    if (!v) throw Error(ErrorKind::ParseError, job.source.string() + ": configuration has no " + what);
    return *v;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* ill = dynamic_cast<const IllConditionedError*>(&e)) {
            err << "condition estimate: " << format_double(ill->condition()) << '\n';
        }
        return exit_code_for(e);
    }
}

} // namespace

int exit_code_for(const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    if (err == nullptr) return kExitNumerical;
    switch (err->kind()) {
    case ErrorKind::IoError: return kExitIo;
    case ErrorKind::ParseError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::BadPeriod:
    case ErrorKind::ZeroLeadingDenominator:
    case ErrorKind::GridMismatch: return kExitConfig;
    case ErrorKind::NonInvertible:
    case ErrorKind::DegenerateLoop:
    case ErrorKind::TooFewSamples:
    case ErrorKind::IllConditioned:
    case ErrorKind::NonFiniteCost: return kExitNumerical;
    }
    return kExitNumerical;
}

nlohmann::json to_json(const TransferOperator& h) {
    return {{"num", h.num()}, {"den", h.den()}, {"lead", h.lead()}};
}

nlohmann::json to_json(const TuningResult& r) {
    nlohmann::json j;
    j["rho_hat"] = vector_json(r.rho_hat);
    j["controller"] = to_json(r.controller);
    j["final_cost"] = number_json(r.final_cost);
    j["iterations"] = r.iterations;
    nlohmann::json trace = nlohmann::json::array();
    for (double v : r.cost_trace) trace.push_back(number_json(v));
    j["cost_trace"] = std::move(trace);
    j["diagnostics"] = {
        {"condition", number_json(r.diagnostics.condition)},
        {"filter", r.diagnostics.filter},
        {"filter_iterations", r.diagnostics.filter_iterations},
        {"max_abs_disturbance", number_json(r.diagnostics.max_abs_disturbance)},
        {"unstable_result", r.diagnostics.unstable_result},
        {"simplex_converged", r.diagnostics.simplex_converged},
    };
    return j;
}

int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const JobConfig job = load_job_config(opt.config);
        ExperimentConfig cfg = need(job.experiment, "experiment section", job);
        if (opt.seed) cfg.seed = *opt.seed;
        if (!opt.out) throw Error(ErrorKind::InvalidArgument, "simulate needs --out");
        const Dataset d = run_experiment(cfg);
        save_dataset(d, *opt.out);
        out << "N=" << d.size() << " noise_variance=" << format_double(cfg.noise_variance) << '\n';
        return int{kExitOk};
    });
}

int cmd_tune(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const JobConfig job = load_job_config(opt.config);
        const TuningSection& t = need(job.tuning, "tuning section", job);
        if (!opt.data) throw Error(ErrorKind::InvalidArgument, "tune needs --data");
        const Dataset d = load_dataset(*opt.data);
        if (t.declared_kind && *t.declared_kind != d.kind()) {
            throw Error(ErrorKind::InvalidArgument,
                        "configuration declares " + std::string(to_string(*t.declared_kind)) + " data but '" +
                            opt.data->string() + "' holds " + std::string(to_string(d.kind())) + " data");
        }
        TuningConfig cfg = t.config;
        if (job.plant) cfg.validation_plant = job.plant;
        const TuningResult result = tune(cfg, d);
        const std::string text = to_json(result).dump(2) + "\n";
        if (opt.out) {
            write_text(*opt.out, text);
        } else {
            out << text;
        }
        if (result.diagnostics.unstable_result) {
            err << "warning: tuned controller does not stabilize the configured plant\n";
        }
        return int{kExitOk};
    });
}

int cmd_evaluate(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const JobConfig job = load_job_config(opt.config);
        const EvaluationSection ev = job.evaluation.value_or(EvaluationSection{});
        EvaluationScenario s;
        s.plant = need(job.plant, "plant", job);
        s.Qd = need(job.reference_model, "reference_model", job);
        s.disturbance = ev.disturbance;
        s.horizon = ev.horizon;
        if (opt.data) {
            s.controller = controller_from_file(*opt.data);
        } else if (ev.controller) {
            s.controller = *ev.controller;
        } else {
            throw Error(ErrorKind::InvalidArgument, "evaluate needs --data <controller.json> or evaluation.controller");
        }
        const DisturbanceCost cost = evaluate_disturbance(s);
        out << "V_dr=" << format_double(cost.value) << (cost.unstable ? " (unstable)" : "") << '\n';
        if (opt.out) {
            const nlohmann::json j = {{"V_dr", number_json(cost.value)},
                                      {"unstable", cost.unstable},
                                      {"horizon", s.horizon},
                                      {"controller", to_json(s.controller)}};
            write_text(*opt.out, j.dump(2) + "\n");
        }
        return int{kExitOk};
    });
}

int cmd_montecarlo(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const JobConfig job = load_job_config(opt.config);
        const MonteCarloSection& sec = need(job.montecarlo, "montecarlo section", job);
        MonteCarloConfig cfg;
        cfg.base = need(job.experiment, "experiment section", job);
        cfg.Qd = need(job.reference_model, "reference_model", job);
        cfg.cells = sec.cells;
        cfg.runs = opt.runs.value_or(sec.runs);
        cfg.jobs = opt.jobs.value_or(sec.jobs);
        if (opt.seed) cfg.base.seed = *opt.seed;
        if (job.evaluation) {
            cfg.disturbance = job.evaluation->disturbance;
            cfg.horizon = job.evaluation->horizon;
        }
        for (auto& cell : cfg.cells) cell.tuning.validation_plant = cfg.base.plant;
        if (!opt.out) throw Error(ErrorKind::InvalidArgument, "montecarlo needs --out <directory>");
        std::error_code ec;
        std::filesystem::create_directories(*opt.out, ec);
        if (ec) throw Error(ErrorKind::IoError, "cannot create '" + opt.out->string() + "': " + ec.message());

        const MonteCarloSummary summary = monte_carlo(cfg);
        write_summary_csv(summary, *opt.out / "summary.csv");
        write_runs_csv(summary, *opt.out / "runs.csv");
        write_text(*opt.out / "report.json", to_json(summary).dump(2) + "\n");

        out << "runs=" << summary.runs << " base_seed=" << summary.base_seed << '\n';
        for (const auto& c : summary.cells) {
            out << c.label << " mean=" << format_double(c.mean) << " std=" << format_double(c.stddev)
                << " unstable=" << c.unstable_count << '\n';
        }
        return int{kExitOk};
    });
}

} // namespace ddlr::cli
