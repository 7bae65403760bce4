#include "ddlr/cli.hpp"

#include "ddlr/error.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ddlr::cli {
namespace {

using Keys = std::initializer_list<std::string_view>;

const Keys kTopKeys = {"plant", "reference_model", "experiment", "tuning", "evaluation", "montecarlo"};
const Keys kOperatorKeys = {"num", "den"};
const Keys kExperimentKeys = {"mode", "initial_controller", "excitation", "noise_variance", "seed"};
const Keys kExcitationKeys = {"square_wave", "series"};
const Keys kSquareWaveKeys = {"period", "amplitude", "samples"};
const Keys kTuningKeys = {"experiment",      "predictor",         "method",           "n_a",
                          "n_b",             "Cf",                "Qd",               "filter",
                          "lags",            "rho0",              "max_simplex_iters", "filter_update_iters",
                          "filter_update_tol", "disturbance",     "welch",            "discard_prefix",
                          "truncate_lag_rows", "simplex_restarts"};
const Keys kCellExtraKeys = {"label"};
const Keys kWelchKeys = {"segment", "overlap"};
const Keys kDisturbanceKeys = {"step"};
const Keys kEvaluationKeys = {"controller", "disturbance", "horizon"};
const Keys kMonteCarloKeys = {"runs", "jobs", "cells"};

class Reader {
public:
    explicit Reader(std::string file) : file_(std::move(file)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
        const YAML::Mark mark = at.Mark();
        std::ostringstream os;
        os << file_;
        if (mark.line >= 0) os << ':' << mark.line + 1 << ':' << mark.column + 1;
        os << ": " << message;
        throw Error(ErrorKind::ParseError, os.str());
    }

    void expect_map(const YAML::Node& node, std::string_view what) const {
        if (!node.IsMap()) fail(node, std::string(what) + " must be a mapping");
    }

    void check_keys(const YAML::Node& map, std::string_view section, Keys allowed, Keys extra = {}) const {
        expect_map(map, section);
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            const auto known = [&](Keys ks) { return std::find(ks.begin(), ks.end(), key) != ks.end(); };
            if (!known(allowed) && !known(extra)) {
                fail(kv.first, "unknown key '" + key + "' in " + std::string(section));
            }
        }
    }

    YAML::Node require(const YAML::Node& map, const char* key, std::string_view section) const {
        const YAML::Node n = map[key];
        if (!n) fail(map, std::string(section) + " is missing required key '" + key + "'");
        return n;
    }

    double real(const YAML::Node& n, std::string_view what) const {
        if (!n.IsScalar()) fail(n, std::string(what) + " must be a number");
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) fail(n, std::string(what) + " must be finite");
            return v;
        } catch (const YAML::BadConversion&) {
            fail(n, std::string(what) + " must be a number, got '" + n.Scalar() + "'");
        }
    }

    std::uint64_t unsigned_int(const YAML::Node& n, std::string_view what) const {
        if (!n.IsScalar()) fail(n, std::string(what) + " must be a non-negative integer");
        const std::string& s = n.Scalar();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            fail(n, std::string(what) + " must be a non-negative integer, got '" + s + "'");
        }
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            fail(n, std::string(what) + " is out of range");
        }
    }

    std::size_t count(const YAML::Node& n, std::string_view what) const {
        return static_cast<std::size_t>(unsigned_int(n, what));
    }

    bool boolean(const YAML::Node& n, std::string_view what) const {
        try {
            return n.as<bool>();
        } catch (const YAML::BadConversion&) {
            fail(n, std::string(what) + " must be true or false");
        }
    }

    std::string text(const YAML::Node& n, std::string_view what) const {
        if (!n.IsScalar()) fail(n, std::string(what) + " must be a string");
        return n.Scalar();
    }

    Series reals(const YAML::Node& n, std::string_view what) const {
        if (!n.IsSequence()) fail(n, std::string(what) + " must be a list of numbers");
        Series v;
        v.reserve(n.size());
        for (const auto& item : n) v.push_back(real(item, what));
        return v;
    }

    TransferOperator op(const YAML::Node& n, std::string_view what) const {
        check_keys(n, what, kOperatorKeys);
        const Poly num = reals(require(n, "num", what), std::string(what) + ".num");
        const Poly den = reals(require(n, "den", what), std::string(what) + ".den");
        if (num.empty()) fail(n["num"], std::string(what) + ".num must not be empty");
        try {
            return TransferOperator(num, den);
        } catch (const Error& e) {
            fail(n["den"], std::string(what) + ": " + e.what());
        }
    }

    ExperimentKind kind(const YAML::Node& n, std::string_view what) const {
        const std::string s = text(n, what);
        if (s == "open_loop" || s == "ol") return ExperimentKind::OpenLoop;
        if (s == "closed_loop" || s == "cl") return ExperimentKind::ClosedLoop;
        fail(n, std::string(what) + " must be open_loop or closed_loop, got '" + s + "'");
    }

    Series disturbance(const YAML::Node& n) const {
        if (n.IsSequence()) {
            Series d = reals(n, "disturbance");
            if (d.empty()) fail(n, "disturbance must not be empty");
            return d;
        }
        check_keys(n, "disturbance", kDisturbanceKeys);
        const std::size_t len = count(require(n, "step", "disturbance"), "disturbance.step");
        if (len == 0) fail(n["step"], "disturbance.step must be at least 1");
        return step_disturbance(len);
    }

private:
    std::string file_;
};

ExperimentConfig parse_experiment(const Reader& rd, const YAML::Node& n, const TransferOperator& plant) {
    rd.check_keys(n, "experiment", kExperimentKeys);
    ExperimentConfig cfg;
    cfg.plant = plant;
    if (n["mode"]) cfg.mode = rd.kind(n["mode"], "experiment.mode");
    if (n["initial_controller"]) cfg.initial_controller = rd.op(n["initial_controller"], "experiment.initial_controller");
    if (n["noise_variance"]) {
        cfg.noise_variance = rd.real(n["noise_variance"], "experiment.noise_variance");
        if (cfg.noise_variance < 0.0) rd.fail(n["noise_variance"], "experiment.noise_variance must be >= 0");
    }
    if (n["seed"]) cfg.seed = rd.unsigned_int(n["seed"], "experiment.seed");

    if (const YAML::Node ex = n["excitation"]) {
        rd.check_keys(ex, "experiment.excitation", kExcitationKeys);
        if (ex["square_wave"] && ex["series"]) {
            rd.fail(ex, "experiment.excitation takes either square_wave or series, not both");
        }
        if (const YAML::Node sw = ex["square_wave"]) {
            rd.check_keys(sw, "experiment.excitation.square_wave", kSquareWaveKeys);
            SquareWave w;
            if (sw["period"]) w.period = rd.count(sw["period"], "square_wave.period");
            if (sw["amplitude"]) w.amplitude = rd.real(sw["amplitude"], "square_wave.amplitude");
            if (sw["samples"]) w.samples = rd.count(sw["samples"], "square_wave.samples");
            if (w.period < 2) rd.fail(sw, "square_wave.period must be at least 2");
            if (w.samples < w.period) rd.fail(sw, "square_wave.samples must be at least one period");
            cfg.excitation = w;
        } else if (const YAML::Node s = ex["series"]) {
            Series x = rd.reals(s, "experiment.excitation.series");
            if (x.empty()) rd.fail(s, "experiment.excitation.series must not be empty");
            cfg.excitation = std::move(x);
        } else {
            rd.fail(ex, "experiment.excitation needs square_wave or series");
        }
    }
    if (cfg.mode == ExperimentKind::ClosedLoop && !cfg.initial_controller) {
        rd.fail(n, "closed-loop experiment needs initial_controller");
    }
    return cfg;
}

// Reads the tuning keys present in `n` on top of `base`.
TuningSection parse_tuning(const Reader& rd, const YAML::Node& n, std::string_view section, TuningSection base,
                           const std::optional<TransferOperator>& reference_model, Keys extra = {}) {
    rd.check_keys(n, section, kTuningKeys, extra);
    const std::string s(section);
    TuningConfig& cfg = base.config;
    if (n["experiment"]) base.declared_kind = rd.kind(n["experiment"], s + ".experiment");
    if (const YAML::Node p = n["predictor"]) {
        const std::string v = rd.text(p, s + ".predictor");
        if (v == "linear") cfg.predictor = Predictor::Linear;
        else if (v == "nonlinear") cfg.predictor = Predictor::Nonlinear;
        else rd.fail(p, s + ".predictor must be linear or nonlinear, got '" + v + "'");
    }
    if (const YAML::Node m = n["method"]) {
        const std::string v = rd.text(m, s + ".method");
        if (v == "norm") cfg.method = Method::Norm;
        else if (v == "correlation") cfg.method = Method::Correlation;
        else rd.fail(m, s + ".method must be norm or correlation, got '" + v + "'");
    }
    if (n["n_a"]) cfg.n_a = rd.count(n["n_a"], s + ".n_a");
    if (n["n_b"]) cfg.n_b = rd.count(n["n_b"], s + ".n_b");
    if (n["Cf"]) cfg.Cf = rd.op(n["Cf"], s + ".Cf");
    if (n["Qd"]) {
        cfg.Qd = rd.op(n["Qd"], s + ".Qd");
    }
    if (const YAML::Node f = n["filter"]) {
        if (f.IsMap()) {
            cfg.filter = rd.op(f, s + ".filter");
        } else {
            const std::string v = rd.text(f, s + ".filter");
            if (v == "none") {
                cfg.filter = NoFilter{};
            } else if (v == "designed") {
                cfg.filter = DesignedMagnitude{};
            } else if (v == "reference_model") {
                // resolved below once Qd is known
                cfg.filter = TransferOperator::zero();
            } else {
                rd.fail(f, s + ".filter must be none, designed, reference_model or {num, den}");
            }
        }
    }
    if (n["lags"]) cfg.lags = rd.count(n["lags"], s + ".lags");
    if (const YAML::Node r = n["rho0"]) {
        const Series v = rd.reals(r, s + ".rho0");
        cfg.rho0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (n["max_simplex_iters"]) cfg.max_simplex_iters = rd.count(n["max_simplex_iters"], s + ".max_simplex_iters");
    if (n["simplex_restarts"]) cfg.simplex_restarts = rd.count(n["simplex_restarts"], s + ".simplex_restarts");
    if (n["filter_update_iters"]) {
        cfg.filter_update_iters = rd.count(n["filter_update_iters"], s + ".filter_update_iters");
    }
    if (n["filter_update_tol"]) cfg.filter_update_tol = rd.real(n["filter_update_tol"], s + ".filter_update_tol");
    if (n["disturbance"]) cfg.disturbance = rd.disturbance(n["disturbance"]);
    if (const YAML::Node w = n["welch"]) {
        rd.check_keys(w, s + ".welch", kWelchKeys);
        if (w["segment"]) cfg.welch_segment = rd.count(w["segment"], s + ".welch.segment");
        if (w["overlap"]) cfg.welch_overlap = rd.real(w["overlap"], s + ".welch.overlap");
        if (!(cfg.welch_overlap >= 0.0 && cfg.welch_overlap < 1.0)) rd.fail(w, s + ".welch.overlap must lie in [0, 1)");
        if (cfg.welch_segment < 2) rd.fail(w, s + ".welch.segment must be at least 2");
    }
    if (n["discard_prefix"]) cfg.discard_prefix = rd.count(n["discard_prefix"], s + ".discard_prefix");
    if (n["truncate_lag_rows"]) cfg.truncate_lag_rows = rd.boolean(n["truncate_lag_rows"], s + ".truncate_lag_rows");

    if (!n["Qd"] && cfg.Qd.is_zero()) {
        if (!reference_model) rd.fail(n, s + " needs Qd (or a top-level reference_model)");
        cfg.Qd = *reference_model;
    }
    if (const auto* op = std::get_if<TransferOperator>(&cfg.filter); op != nullptr && op->is_zero()) {
        cfg.filter = cfg.Qd;
    }

    // Consistency checks on the merged result.
    const std::size_t p = cfg.n_a + cfg.n_b + 1;
    if (cfg.method == Method::Correlation && !cfg.lags) rd.fail(n, s + ": correlation method needs lags");
    if (cfg.predictor == Predictor::Nonlinear && !cfg.rho0) rd.fail(n, s + ": nonlinear predictor needs rho0");
    if (cfg.rho0 && static_cast<std::size_t>(cfg.rho0->size()) != p) {
        rd.fail(n["rho0"] ? n["rho0"] : n, s + ".rho0 must have n_a + n_b + 1 = " + std::to_string(p) + " entries");
    }
    if (std::holds_alternative<DesignedMagnitude>(cfg.filter) && cfg.disturbance.empty()) {
        cfg.disturbance = step_disturbance(kDefaultHorizon);
    }
    return base;
}

TuningSection default_tuning() {
    TuningSection t;
    t.config.Qd = TransferOperator::zero(); // marks "not given yet"
    return t;
}

} // namespace

JobConfig parse_job_config(const std::string& text, const std::filesystem::path& source) {
    const Reader rd(source.string());
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source.string() << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
        throw Error(ErrorKind::ParseError, os.str());
    }
    if (!root || root.IsNull()) {
        throw Error(ErrorKind::ParseError, source.string() + ": configuration is empty");
    }
    rd.check_keys(root, "configuration", kTopKeys);

    JobConfig job;
    job.source = source;
    if (root["plant"]) job.plant = rd.op(root["plant"], "plant");
    if (root["reference_model"]) job.reference_model = rd.op(root["reference_model"], "reference_model");
    if (const YAML::Node e = root["experiment"]) {
        if (!job.plant) rd.fail(e, "experiment needs a top-level plant");
        job.experiment = parse_experiment(rd, e, *job.plant);
    }
    if (const YAML::Node t = root["tuning"]) {
        job.tuning = parse_tuning(rd, t, "tuning", default_tuning(), job.reference_model);
    }
    if (const YAML::Node ev = root["evaluation"]) {
        rd.check_keys(ev, "evaluation", kEvaluationKeys);
        EvaluationSection sec;
        if (ev["controller"]) sec.controller = rd.op(ev["controller"], "evaluation.controller");
        if (ev["disturbance"]) sec.disturbance = rd.disturbance(ev["disturbance"]);
        if (ev["horizon"]) sec.horizon = rd.count(ev["horizon"], "evaluation.horizon");
        if (sec.horizon == 0) rd.fail(ev, "evaluation.horizon must be at least 1");
        if (sec.disturbance.size() < sec.horizon) rd.fail(ev, "evaluation.disturbance is shorter than the horizon");
        job.evaluation = std::move(sec);
    }
    if (const YAML::Node mc = root["montecarlo"]) {
        rd.check_keys(mc, "montecarlo", kMonteCarloKeys);
        MonteCarloSection sec;
        if (mc["runs"]) sec.runs = rd.count(mc["runs"], "montecarlo.runs");
        if (mc["jobs"]) sec.jobs = rd.count(mc["jobs"], "montecarlo.jobs");
        if (sec.runs == 0) rd.fail(mc["runs"], "montecarlo.runs must be at least 1");
        const YAML::Node cells = rd.require(mc, "cells", "montecarlo");
        if (!cells.IsSequence() || cells.size() == 0) rd.fail(cells, "montecarlo.cells must be a non-empty list");
        const TuningSection base = job.tuning.value_or(default_tuning());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const YAML::Node c = cells[i];
            const std::string where = "montecarlo.cells[" + std::to_string(i) + "]";
            const TuningSection t = parse_tuning(rd, c, where, base, job.reference_model, kCellExtraKeys);
            TuningCell cell;
            cell.tuning = t.config;
            if (!t.declared_kind) rd.fail(c, where + " needs experiment: open_loop or closed_loop");
            cell.experiment = *t.declared_kind;
            cell.label = c["label"] ? rd.text(c["label"], where + ".label") : where;
            sec.cells.push_back(std::move(cell));
        }
        job.montecarlo = std::move(sec);
    }
    return job;
}

JobConfig load_job_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open configuration '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_job_config(buf.str(), path);
}

} // namespace ddlr::cli
