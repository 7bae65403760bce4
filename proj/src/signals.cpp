#include "ddlr/signals.hpp"

#include "ddlr/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace ddlr {

Dataset::Dataset(ExperimentKind kind, std::optional<Series> r, Series u, Series y)
    : kind_(kind), r_(std::move(r)), u_(std::move(u)), y_(std::move(y)) {
    if (u_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "dataset must contain at least one sample");
    }
    if (y_.size() != u_.size() || (r_ && r_->size() != u_.size())) {
        throw Error(ErrorKind::DimensionMismatch, "dataset series must have identical lengths");
    }
}

Dataset Dataset::open_loop(Series u, Series y) {
    return Dataset(ExperimentKind::OpenLoop, std::nullopt, std::move(u), std::move(y));
}

Dataset Dataset::closed_loop(Series r, Series u, Series y) {
    return Dataset(ExperimentKind::ClosedLoop, std::move(r), std::move(u), std::move(y));
}

const Series& Dataset::r() const {
    if (!r_) {
        throw Error(ErrorKind::InvalidArgument, "open-loop dataset has no reference series");
    }
    return *r_;
}

const Series& Dataset::excitation() const { return kind_ == ExperimentKind::OpenLoop ? u_ : *r_; }

Series square_wave(std::size_t period, double amplitude, std::size_t n) {
    if (period < 2) {
        throw Error(ErrorKind::BadPeriod, "square wave period must be at least 2 samples");
    }
    Series out(n);
    const std::size_t half = period / 2;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (i % period) < half ? amplitude : -amplitude;
    }
    return out;
}

Series gaussian_noise(std::uint64_t seed, double variance, std::size_t n) {
    if (variance < 0.0 || !std::isfinite(variance)) {
        throw Error(ErrorKind::InvalidArgument, "noise variance must be finite and non-negative");
    }
    Series out(n, 0.0);
    if (variance == 0.0) {
        return out;
    }
    std::mt19937_64 engine(seed);
    // (0, 1]: never zero, so log() below is finite
    auto uniform = [&engine] { return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53; };
    const double sigma = std::sqrt(variance);
    for (std::size_t i = 0; i < n; i += 2) {
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        out[i] = sigma * radius * std::cos(angle);
        if (i + 1 < n) {
            out[i + 1] = sigma * radius * std::sin(angle);
        }
    }
    return out;
}

ExperimentRecord run_experiment_record(const ExperimentConfig& cfg) {
    Series excitation;
    if (const auto* sq = std::get_if<SquareWave>(&cfg.excitation)) {
        if (sq->samples < sq->period) {
            throw Error(ErrorKind::InvalidArgument, "square wave needs at least one full period of samples");
        }
        excitation = square_wave(sq->period, sq->amplitude, sq->samples);
    } else {
        excitation = std::get<Series>(cfg.excitation);
    }
    if (excitation.empty()) {
        throw Error(ErrorKind::InvalidArgument, "excitation must contain at least one sample");
    }
    const std::size_t n = excitation.size();
    Series v = gaussian_noise(cfg.seed, cfg.noise_variance, n);

    if (cfg.mode == ExperimentKind::OpenLoop) {
        Series y = simulate(cfg.plant, excitation);
        for (std::size_t t = 0; t < n; ++t) y[t] += v[t];
        return {Dataset::open_loop(std::move(excitation), std::move(y)), std::move(v)};
    }

    if (!cfg.initial_controller) {
        throw Error(ErrorKind::InvalidArgument, "closed-loop experiment requires an initial controller");
    }
    const TransferOperator& C0 = *cfg.initial_controller;
    const Sensitivities loop = closed_loop(cfg.plant, C0);
    Series y = simulate(loop.T, excitation);
    const Series noise_part = simulate(loop.S, v);
    for (std::size_t t = 0; t < n; ++t) y[t] += noise_part[t];

    // G^-1 T0 == C0 S0, so u = C0 S0 (r - v)
    Series r_minus_v(n);
    for (std::size_t t = 0; t < n; ++t) r_minus_v[t] = excitation[t] - v[t];
    Series u = simulate(tf_mul(C0, loop.S), r_minus_v);
    return {Dataset::closed_loop(std::move(excitation), std::move(u), std::move(y)), std::move(v)};
}

Dataset run_experiment(const ExperimentConfig& cfg) { return run_experiment_record(cfg).data; }

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", value);
    return buf;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
    }
    const bool closed = d.kind() == ExperimentKind::ClosedLoop;
    out << (closed ? "t,r,u,y\n" : "t,u,y\n");
    for (std::size_t t = 0; t < d.size(); ++t) {
        out << (t + 1) << ',';
        if (closed) out << format_double(d.r()[t]) << ',';
        out << format_double(d.u()[t]) << ',' << format_double(d.y()[t]) << '\n';
    }
    out.flush();
    if (!out) {
        throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
    }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, std::size_t line_no, const std::string& file) {
    cell = strip(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorKind::ParseError,
                    file + ":" + std::to_string(line_no) + ": non-numeric cell '" + std::string(cell) + "'");
    }
    return value;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for reading");
    }
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::ParseError, file + ":1: missing header");
    }
    const std::string_view header = strip(line);
    bool closed = false;
    if (header == "t,r,u,y") {
        closed = true;
    } else if (header != "t,u,y") {
        throw Error(ErrorKind::ParseError, file + ":1: expected header 't,u,y' or 't,r,u,y'");
    }
    const std::size_t columns = closed ? 4 : 3;

    Series r;
    Series u;
    Series y;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != columns) {
            throw Error(ErrorKind::ParseError, file + ":" + std::to_string(line_no) + ": expected " +
                                                   std::to_string(columns) + " cells, found " +
                                                   std::to_string(cells.size()));
        }
        const double t = parse_cell(cells[0], line_no, file);
        if (t != static_cast<double>(u.size() + 1)) {
            throw Error(ErrorKind::ParseError,
                        file + ":" + std::to_string(line_no) + ": sample index out of sequence");
        }
        std::size_t c = 1;
        if (closed) r.push_back(parse_cell(cells[c++], line_no, file));
        u.push_back(parse_cell(cells[c++], line_no, file));
        y.push_back(parse_cell(cells[c], line_no, file));
    }
    if (u.empty()) {
        throw Error(ErrorKind::ParseError, file + ": no samples");
    }
    return closed ? Dataset::closed_loop(std::move(r), std::move(u), std::move(y))
                  : Dataset::open_loop(std::move(u), std::move(y));
}

} // namespace ddlr
