#include <CLI11.hpp>
#include <iostream>

#include "anmod/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Model-inversion design optimizer for superconducting circuit layouts"};
    app.require_subcommand(1);

    anmod::RunCommand run;
    auto* run_cmd = app.add_subcommand("run", "Optimize one design from the configured initial point");
    run_cmd->add_option("--config", run.config, "Configuration file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", run.seed, "Run seed");
    run_cmd->add_option("--max-iter", run.max_iterations, "Maximum number of design updates");
    run_cmd->add_option("--adjustment-rate", run.adjustment_rate, "Fraction of each update step to apply");
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_option("--set", run.overrides, "Override a config entry, section.key=value");

    anmod::BatchCommand batch;
    auto* batch_cmd = app.add_subcommand("batch", "Run from bounds-uniform initial points");
    batch_cmd->add_option("--config", batch.config, "Configuration file")->required()->check(CLI::ExistingFile);
    batch_cmd->add_option("--n", batch.n, "Number of initial points");
    batch_cmd->add_option("--seed", batch.seed, "Master seed; run i uses seed + i");
    batch_cmd->add_option("--out", batch.out, "Output directory");
    batch_cmd->add_option("--set", batch.overrides, "Override a config entry, section.key=value");
    batch_cmd->add_flag("--serial", batch.serial, "Run one at a time");

    anmod::SweepCommand sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate the backend along one design variable and fit power laws");
    sweep_cmd->add_option("--config", sweep.config, "Configuration file")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--variable", sweep.variable, "Design variable to sweep")->required();
    sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->required()->delimiter(',');
    sweep_cmd->add_option("--out", sweep.out, "Output directory");
    sweep_cmd->add_option("--set", sweep.overrides, "Override a config entry, section.key=value");

    anmod::ReportCommand report;
    auto* report_cmd = app.add_subcommand("report", "Write CSV tables and SVG charts for a run history");
    report_cmd->add_option("--history", report.history, "history.jsonl file")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--out", report.out, "Output directory (default: <history dir>/report)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : anmod::kExitConfigError;
    }

    if (*run_cmd) return anmod::cli_run(run, std::cout, std::cerr);
    if (*batch_cmd) return anmod::cli_batch(batch, std::cout, std::cerr);
    if (*sweep_cmd) return anmod::cli_sweep(sweep, std::cout, std::cerr);
    return anmod::cli_report(report, std::cout, std::cerr);
}
