#pragma once

// The update engine: model-ratio prediction, the closed cost over the
// next design point, the per-block bounded solve, adjustment-rate
// filtering, and the simulate/update loop.

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "anmod/evaluator.hpp"
#include "anmod/problem.hpp"
#include "anmod/values.hpp"

namespace anmod {

struct UpdateSettings {
    double adjustment_rate = 1.0;        // gamma in (0, 1]
    double cost_tolerance = 1e-20;       // block solve stops below this cost
    int max_cost_evaluations = 20000;    // per block
    double convergence_tolerance = 0.01; // on max |y / target - 1|
    int max_iterations = 10;
    double divergence_factor = 4.0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Raised when a model cannot be evaluated during an update (zero or
/// non-finite denominator, non-finite cost).
class UpdateError : public std::runtime_error {
public:
    UpdateError(std::string model, std::string detail);
    const std::string& model() const noexcept { return model_; }

private:
    std::string model_;
};

/// Parameter values substituted inside the models when scoring a candidate
/// design: targeted parameters at their targets, untargeted ones at their
/// last evaluated value, derived ones recomputed from those.
ParameterVector target_substitution(const ProblemFormulation& pf, const ParameterVector& y_old);

/// Ratio prediction of every parameter at `x_new`. Untargeted parameters
/// keep their previous value; derived ones are recomputed from the result.
ParameterVector predict(const ProblemFormulation& pf, const DesignPoint& x_new, const DesignPoint& x_old,
                        const ParameterVector& y_old, const ParameterVector& y_sub);

/// Sum over targeted parameters of |(y_old/target) f(targets, x) / f(y_old, x_old) - 1|^2.
double cost(const ProblemFormulation& pf, const DesignPoint& x, const DesignPoint& x_old,
            const ParameterVector& y_old);

/// The cost of one iteration compiled against a flat design vector laid
/// out in declaration order. Denominators are fixed at construction.
class CostModel {
public:
    CostModel(const ProblemFormulation& pf, const DesignPoint& x_old, const ParameterVector& y_old);

    std::size_t dimension() const noexcept { return dimension_; }
    const ProblemFormulation& problem() const noexcept { return *pf_; }

    /// Predicted value of parameter `parameter_index` at design `x`.
    double predicted(std::size_t parameter_index, std::span<const double> x) const;
    /// (predicted / target - 1) for a targeted parameter.
    double residual(std::size_t parameter_index, std::span<const double> x) const;
    double cost(std::span<const double> x) const;
    double block_cost(const Block& block, std::span<const double> x) const;

    /// Model value with parameters substituted at targets, i.e. f(targets, x).
    double model_at_targets(std::size_t parameter_index, std::span<const double> x) const;
    /// f(y_old, x_old).
    double denominator(std::size_t parameter_index) const { return terms_[parameter_index].denominator; }
    /// target * f(y_old, x_old) / y_old: the model value that makes the prediction hit the target.
    double required_model_value(std::size_t parameter_index) const;

    std::vector<double> flatten(const DesignPoint& x) const;
    DesignPoint unflatten(std::span<const double> x) const;

private:
    struct Term {
        CompiledExpression model;
        double y_old = 0.0;
        double target = 0.0;
        double denominator = 0.0;
        bool active = false;
    };

    const ProblemFormulation* pf_;
    std::size_t dimension_;
    std::vector<double> substituted_;  // parameter slots, after the design slots
    std::vector<Term> terms_;          // indexed like pf.parameters
};

enum class SolveMethod { fixed_point, closed_form, scalar_search, simplex };

const char* to_string(SolveMethod method);

struct BlockSolution {
    std::vector<double> values;  // one per block variable, in block order
    double cost = 0.0;           // block cost at `values`
    bool clamped = false;        // a bound stopped the solve short of zero cost
    SolveMethod method = SolveMethod::fixed_point;
    int evaluations = 0;
};

/// Minimizes the block's cost over its own variables, holding every other
/// coordinate of `base` fixed. `base` carries earlier-block solutions.
BlockSolution minimize_block(const CostModel& model, const Block& block, std::span<const double> base,
                             const UpdateSettings& settings);

/// Convenience overload seeded at x_old with no earlier substitutions.
BlockSolution minimize_block(const Block& block, const ProblemFormulation& pf, const DesignPoint& x_old,
                             const ParameterVector& y_old, const UpdateSettings& settings);

struct UpdateResult {
    DesignPoint x_star;  // unfiltered minimizer
    DesignPoint x_new;   // after the adjustment rate and bounds
    ParameterVector predicted;
    double cost = 0.0;   // at x_new
    std::vector<BlockSolution> blocks;
    bool clamped = false;
};

UpdateResult update_step(const ProblemFormulation& pf, const DesignPoint& x_old, const ParameterVector& y_old,
                         const UpdateSettings& settings);
UpdateResult update_step(const ProblemFormulation& pf, const std::vector<Block>& blocks, const DesignPoint& x_old,
                         const ParameterVector& y_old, const UpdateSettings& settings);

enum class RunStatus { running, success, diverged, max_iter, evaluator_error };

const char* to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct BlockRecord {
    int rank = 0;
    std::vector<std::string> parameters;
    std::vector<std::string> variables;

    bool operator==(const BlockRecord&) const = default;
};

struct IterationRecord {
    int k = 0;
    DesignPoint x;              // design evaluated at this iteration
    ParameterVector y;          // evaluated parameters, derived included
    ParameterVector predicted;  // prediction at the accepted next design; empty on the last record
    /// Cost at the accepted next design, or for the last record the cost
    /// of the evaluated point itself. Absent when the evaluation failed.
    std::optional<double> cost;
    std::vector<BlockRecord> blocks;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::running;
    std::string note;

    bool operator==(const IterationRecord&) const = default;
};

struct RunHistory {
    std::string problem;
    ParameterVector targets;
    std::vector<IterationRecord> records;
    RunStatus status = RunStatus::running;
    std::string message;

    /// Number of design updates performed (index of the last record).
    int iterations() const { return records.empty() ? 0 : records.back().k; }
    bool operator==(const RunHistory&) const = default;
};

struct RunOptions {
    int fidelity = kExactFidelity;
    std::optional<DesignPoint> initial;  // defaults to the declared values
};

/// Per-iteration evaluator seed.
std::uint64_t iteration_seed(std::uint64_t run_seed, int k);

/// max over targeted i of |y_i / target_i - 1|.
double max_relative_error(const ProblemFormulation& pf, const ParameterVector& y);

RunHistory run(const ProblemFormulation& pf, const Evaluator& evaluator, const UpdateSettings& settings,
               std::uint64_t seed, const RunOptions& options = {});

}  // namespace anmod
