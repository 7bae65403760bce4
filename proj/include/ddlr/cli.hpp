#pragma once

// Job configuration files and the four batch workflows behind the ddlr tool.

#include "ddlr/estimate.hpp"
#include "ddlr/evaluate.hpp"
#include "ddlr/signals.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace ddlr::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIo = 3,
    kExitNumerical = 4,
};

struct TuningSection {
    TuningConfig config;
    std::optional<ExperimentKind> declared_kind; // checked against the dataset
};

struct EvaluationSection {
    std::optional<TransferOperator> controller;
    Series disturbance = step_disturbance(kDefaultHorizon);
    std::size_t horizon = kDefaultHorizon;
};

struct MonteCarloSection {
    std::size_t runs = 20;
    std::size_t jobs = 1;
    std::vector<TuningCell> cells;
};

// YAML job file. Every section is optional; each command checks for the ones
// it needs. Unknown keys are rejected.
struct JobConfig {
    std::filesystem::path source;
    std::optional<TransferOperator> plant;
    std::optional<TransferOperator> reference_model;
    std::optional<ExperimentConfig> experiment;
    std::optional<TuningSection> tuning;
    std::optional<EvaluationSection> evaluation;
    std::optional<MonteCarloSection> montecarlo;
};

// Throws Error(ParseError) with "file:line:column: message", Error(IoError)
// if the file cannot be read.
[[nodiscard]] JobConfig load_job_config(const std::filesystem::path& path);
[[nodiscard]] JobConfig parse_job_config(const std::string& text, const std::filesystem::path& source = "<string>");

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> data;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
};

// Each command reports progress on `out`, problems on `err`, and returns an
// ExitCode. No exception escapes.
int cmd_simulate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_tune(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evaluate(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_montecarlo(const CommandOptions& opt, std::ostream& out, std::ostream& err);

[[nodiscard]] int exit_code_for(const std::exception& e);

[[nodiscard]] nlohmann::json to_json(const TuningResult& r);
[[nodiscard]] nlohmann::json to_json(const TransferOperator& h);

} // namespace ddlr::cli
