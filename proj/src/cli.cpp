#include "anmod/cli.hpp"

#include <charconv>
#include <ostream>

#include "anmod/config.hpp"
#include "anmod/history.hpp"
#include "anmod/report.hpp"
#include "anmod/studies.hpp"
#include "anmod/surrogates.hpp"

namespace anmod {

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

int exit_code(RunStatus status) {
    switch (status) {
        case RunStatus::success: return kExitSuccess;
        case RunStatus::diverged: return kExitDiverged;
        case RunStatus::max_iter: return kExitMaxIter;
        case RunStatus::evaluator_error: return kExitEvaluatorError;
        case RunStatus::running: break;
    }
    return kExitConfigError;
}

void print_config_error(const ConfigError& e, std::ostream& err) {
    err << "configuration error:\n";
    for (const auto& p : e.problems()) err << "  " << p << '\n';
}

}  // namespace

int cli_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
    auto overrides = cmd.overrides;
    if (cmd.seed) overrides.push_back("run.seed=" + std::to_string(*cmd.seed));
    if (cmd.max_iterations) overrides.push_back("optimizer.max_iterations=" + std::to_string(*cmd.max_iterations));
    if (cmd.adjustment_rate) overrides.push_back("optimizer.adjustment_rate=" + num(*cmd.adjustment_rate));
    try {
        const auto cfg = load_config(cmd.config, overrides);
        const auto backend = make_backend(cfg);
        RunOptions opts;
        opts.fidelity = cfg.fidelity();
        const auto history = run(cfg.problem, *backend, cfg.optimizer, cfg.seed, opts);
        const auto dir = cmd.out ? *cmd.out : cfg.output_dir;
        save_run(dir, history, cfg);

        out << cfg.name << ": " << to_string(history.status) << " after " << history.iterations() << " iteration(s)";
        if (!history.message.empty()) out << " (" << history.message << ")";
        out << '\n';
        const auto& last = history.records.back();
        for (const auto& [name, target] : history.targets) {
            out << "  " << name << " = ";
            if (last.y.contains(name))
                out << num(last.y.at(name)) << "  target " << num(target) << "  rel.err "
                    << num(last.y.at(name) / target - 1.0) << '\n';
            else
                out << "n/a\n";
        }
        out << "history: " << (dir / "history.jsonl").string() << '\n';
        return exit_code(history.status);
    } catch (const ConfigError& e) {
        print_config_error(e, err);
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cli_batch(const BatchCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        const auto cfg = load_config(cmd.config, cmd.overrides);
        const int n = cmd.n.value_or(cfg.sample_count);
        if (n < 0) throw ConfigError({"--n must be non-negative"});
        const std::uint64_t seed = cmd.seed.value_or(cfg.seed);
        const auto backend = make_backend(cfg);
        const auto batch = run_batch(cfg, *backend, n, seed, cmd.serial ? Execution::serial : Execution::parallel);
        const auto dir = cmd.out ? *cmd.out : cfg.output_dir;
        save_batch(dir, batch, cfg);
        out << cfg.name << ": " << batch.count(RunStatus::success) << "/" << batch.runs.size() << " runs succeeded";
        if (!batch.runs.empty()) out << " (fraction " << num(batch.success_fraction()) << ")";
        out << '\n';
        for (const auto& r : batch.runs)
            out << "  run " << r.index << " seed " << r.seed << ": " << to_string(r.history.status) << " after "
                << r.history.iterations() << " iteration(s)\n";
        out << "summary: " << (dir / "batch_summary.ini").string() << '\n';
        return kExitSuccess;
    } catch (const ConfigError& e) {
        print_config_error(e, err);
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cli_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        const auto cfg = load_config(cmd.config, cmd.overrides);
        const auto backend = make_backend(cfg);
        const auto result = sweep(cfg, *backend, cmd.variable, cmd.values);
        const auto dir = cmd.out ? *cmd.out : cfg.output_dir;
        save_sweep(dir, result);

        out << cmd.variable;
        for (const auto& [name, fit] : result.fits) out << '\t' << name;
        out << '\n';
        for (const auto& p : result.points) {
            out << num(p.value);
            for (const auto& [name, fit] : result.fits)
                out << '\t' << (p.y && p.y->contains(name) ? num(p.y->at(name)) : std::string("-"));
            if (!p.note.empty()) out << "\t# skipped: " << p.note;
            out << '\n';
        }
        out << "\nfit y = a * " << cmd.variable << "^b\n";
        for (const auto& [name, fit] : result.fits) {
            out << "  " << name << ": ";
            if (fit)
                out << "a = " << num(fit->a) << "  b = " << num(fit->b) << "  residual = " << num(fit->residual) << '\n';
            else
                out << "no fit (needs two or more positive points)\n";
        }
        return kExitSuccess;
    } catch (const ConfigError& e) {
        print_config_error(e, err);
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

int cli_report(const ReportCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        const auto history = read_history(cmd.history);
        const auto dir = cmd.out ? *cmd.out : cmd.history.parent_path() / "report";
        const auto files = write_report(history, dir);
        out << "wrote " << files.errors_csv.string() << ", " << files.variables_csv.string() << " and "
            << files.charts.size() << " chart(s) to " << dir.string() << '\n';
        return kExitSuccess;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}

}  // namespace anmod
