#pragma once

// Multi-run studies: bounds-uniform batch runs, single-variable sweeps with
// a power-law fit, and a dense-grid scan of the update cost. Every kernel
// has a serial reference; the parallel path must produce identical results.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anmod/config.hpp"
#include "anmod/engine.hpp"

namespace anmod {

enum class Execution { serial, parallel };

/// `n` design points drawn uniformly from the bound box, in order.
std::vector<DesignPoint> sample_initial_points(const ProblemFormulation& pf, int n, std::uint64_t seed);

struct BatchRun {
    int index = 0;
    std::uint64_t seed = 0;
    DesignPoint initial;
    RunHistory history;
};

struct BatchResult {
    std::vector<BatchRun> runs;

    int count(RunStatus status) const;
    double success_fraction() const;
    /// Iterations used by successful runs: iterations -> number of runs.
    std::map<int, int> iteration_histogram() const;
};

/// Run i starts from sample i and uses seed master_seed + i.
BatchResult run_batch(const RunConfig& config, const Evaluator& evaluator, int n, std::uint64_t master_seed,
                      Execution execution = Execution::parallel);

/// Writes run_NNN/ per run plus batch_summary.ini and batch_runs.csv.
void save_batch(const std::filesystem::path& dir, const BatchResult& batch, const RunConfig& config);

struct PowerLawFit {
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0;  // RMS of the log residuals
    int points = 0;
};

/// Least squares of log y = log a + b log x. Needs two or more distinct
/// positive x and positive y; returns nullopt otherwise.
std::optional<PowerLawFit> fit_power_law(std::span<const double> x, std::span<const double> y);

struct SweepPoint {
    double value = 0.0;
    std::optional<ParameterVector> y;
    std::string note;  // why the point was skipped
};

struct SweepResult {
    std::string variable;
    std::vector<SweepPoint> points;
    std::map<std::string, std::optional<PowerLawFit>> fits;
};

/// Evaluates the backend at each value of `variable`, others at their
/// configured values. Out-of-bounds values are skipped with a note.
SweepResult sweep(const RunConfig& config, const Evaluator& evaluator, const std::string& variable,
                  const std::vector<double>& values);

void save_sweep(const std::filesystem::path& dir, const SweepResult& result);

struct GridMinimum {
    std::vector<double> x;
    double cost = 0.0;
    std::size_t evaluations = 0;
};

/// Exhaustive scan of `cost` over a regular grid with `points_per_axis`
/// nodes per axis spanning [lower, upper]. Ties resolve to the lowest
/// flat index, so both executions agree exactly.
GridMinimum grid_minimum(const CostModel& model, std::span<const double> lower, std::span<const double> upper,
                         int points_per_axis, Execution execution = Execution::parallel);

/// Joint (unfactorized) minimum of the full cost: grid scan then simplex refinement.
GridMinimum joint_minimum(const CostModel& model, std::span<const double> lower, std::span<const double> upper,
                          int points_per_axis, const UpdateSettings& settings,
                          Execution execution = Execution::parallel);

}  // namespace anmod
