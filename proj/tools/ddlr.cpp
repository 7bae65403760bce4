#include "ddlr/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace ddlr::cli;

    CLI::App app{"Data-driven tuning of restricted-order controllers for load-disturbance rejection"};
    app.require_subcommand(1);

    CommandOptions opt;
    std::string config;
    std::string data;
    std::string out;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;

    auto add_common = [&](CLI::App* cmd, bool with_data, bool with_mc) {
        cmd->add_option("--config", config, "YAML job configuration")->required();
        if (with_data) cmd->add_option("--data", data, "input dataset CSV or controller JSON");
        cmd->add_option("--out", out, "output path");
        cmd->add_option("--seed", seed, "override the experiment seed");
        if (with_mc) {
            cmd->add_option("--runs", runs, "number of Monte Carlo runs")->check(CLI::PositiveNumber);
            cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        }
    };
    CLI::App* simulate = app.add_subcommand("simulate", "run a simulated experiment and write its dataset");
    CLI::App* tune = app.add_subcommand("tune", "estimate controller parameters from a dataset");
    CLI::App* evaluate = app.add_subcommand("evaluate", "disturbance-response cost of a controller");
    CLI::App* montecarlo = app.add_subcommand("montecarlo", "repeat experiments and tunings over noise seeds");
    add_common(simulate, false, false);
    add_common(tune, true, false);
    add_common(evaluate, true, false);
    add_common(montecarlo, false, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    opt.config = config;
    CLI::App* chosen = app.get_subcommands().front();
    auto given = [&](const char* name) {
        const CLI::Option* o = chosen->get_option_no_throw(name);
        return o != nullptr && o->count() > 0;
    };
    if (given("--data")) opt.data = data;
    if (given("--out")) opt.out = out;
    if (given("--seed")) opt.seed = seed;
    if (given("--runs")) opt.runs = runs;
    if (given("--jobs")) opt.jobs = jobs;

    if (chosen == simulate) return cmd_simulate(opt, std::cout, std::cerr);
    if (chosen == tune) return cmd_tune(opt, std::cout, std::cerr);
    if (chosen == evaluate) return cmd_evaluate(opt, std::cout, std::cerr);
    return cmd_montecarlo(opt, std::cout, std::cerr);
}
