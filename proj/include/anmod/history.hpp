#pragma once

// JSON-lines run histories and the per-run summary file.
//
// One object per iteration with keys
//   problem, k, x, y, y_pred, target, cost, status, seed, blocks, note.
// `cost` is null when the evaluation failed. `status` is RUNNING on every
// line but the last, which carries the final status.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "anmod/config.hpp"
#include "anmod/engine.hpp"

namespace anmod {

class HistoryError : public std::runtime_error {
public:
    HistoryError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

std::string history_line(const RunHistory& history, const IterationRecord& record);
void write_history(std::ostream& out, const RunHistory& history);
void write_history(const std::filesystem::path& path, const RunHistory& history);

/// Throws HistoryError naming the 1-based line that could not be read.
RunHistory read_history(std::istream& in);
RunHistory read_history(const std::filesystem::path& path);

/// Final relative error per target, iterations used, status and the config snapshot.
void write_summary(const std::filesystem::path& path, const RunHistory& history, const RunConfig& config);

/// Writes history.jsonl and summary.ini into `dir`.
void save_run(const std::filesystem::path& dir, const RunHistory& history, const RunConfig& config);

}  // namespace anmod
