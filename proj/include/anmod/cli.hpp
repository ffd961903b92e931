#pragma once

// Command implementations behind the anmod executable. Each returns the
// process exit code and writes human-readable output to `out`/`err`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace anmod {

enum ExitCode : int {
    kExitSuccess = 0,
    kExitConfigError = 1,
    kExitDiverged = 2,
    kExitMaxIter = 3,
    kExitEvaluatorError = 4,
};

struct RunCommand {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iterations;
    std::optional<double> adjustment_rate;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
};

struct BatchCommand {
    std::filesystem::path config;
    std::optional<int> n;  // defaults to [sampling] count
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
    bool serial = false;
};

struct SweepCommand {
    std::filesystem::path config;
    std::string variable;
    std::vector<double> values;
    std::optional<std::filesystem::path> out;
    std::vector<std::string> overrides;
};

struct ReportCommand {
    std::filesystem::path history;
    std::optional<std::filesystem::path> out;  // defaults to <history dir>/report
};

int cli_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);
int cli_batch(const BatchCommand& cmd, std::ostream& out, std::ostream& err);
int cli_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err);
int cli_report(const ReportCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace anmod
