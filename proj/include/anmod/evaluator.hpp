#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "anmod/problem.hpp"
#include "anmod/values.hpp"

namespace anmod {

/// Fidelity value meaning "noise disabled".
inline constexpr int kExactFidelity = std::numeric_limits<int>::max();

enum class EvaluatorFault { mode_order, missing_variable, out_of_domain, missing_parameter };

const char* to_string(EvaluatorFault fault);

class EvaluatorError : public std::runtime_error {
public:
    EvaluatorError(EvaluatorFault fault, std::string message);
    EvaluatorFault fault() const noexcept { return fault_; }

private:
    EvaluatorFault fault_;
};

/// Produces parameter values for a design point. Implementations must be
/// deterministic in (x, fidelity, seed) and safe to call concurrently.
class Evaluator {
public:
    virtual ~Evaluator() = default;

    virtual std::string name() const = 0;
    virtual std::vector<std::string> variable_names() const = 0;
    virtual std::vector<std::string> parameter_names() const = 0;

    /// `fidelity` is the refinement pass count; kExactFidelity disables noise.
    virtual ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const = 0;

protected:
    /// Fetches a variable or raises EvaluatorError(missing_variable).
    static double require(const DesignPoint& x, const std::string& name);
};

/// Ground truth that is exactly proportional to the user models:
/// y_i = c_i f_i(y, x). Parameters referenced inside a model are computed
/// first, so the models must not reference each other cyclically.
/// Untargeted parameters report fixed values.
class PerfectModelEvaluator final : public Evaluator {
public:
    /// `pf` must be prepared. Missing scales default to 1.
    PerfectModelEvaluator(ProblemFormulation pf, std::map<std::string, double> scales,
                          std::map<std::string, double> untargeted_values = {});

    std::string name() const override { return "perfect_model"; }
    std::vector<std::string> variable_names() const override;
    std::vector<std::string> parameter_names() const override;
    ParameterVector evaluate(const DesignPoint& x, int fidelity, std::uint64_t seed) const override;

    double scale(const std::string& parameter) const;

    /// Scales chosen so that truth equals the targets at `x_solution`.
    static std::map<std::string, double> scales_for_solution(const ProblemFormulation& pf,
                                                             const DesignPoint& x_solution);

private:
    ProblemFormulation pf_;
    std::map<std::string, double> scales_;
    std::map<std::string, double> untargeted_;
    std::vector<std::size_t> order_;  // parameter evaluation order
};

/// Returns fixed values regardless of the design.
class ConstantEvaluator final : public Evaluator {
public:
    ConstantEvaluator(std::vector<std::string> variables, ParameterVector values)
        : variables_(std::move(variables)), values_(std::move(values)) {}

    std::string name() const override { return "constant"; }
    std::vector<std::string> variable_names() const override { return variables_; }
    std::vector<std::string> parameter_names() const override;
    ParameterVector evaluate(const DesignPoint&, int, std::uint64_t) const override { return values_; }

private:
    std::vector<std::string> variables_;
    ParameterVector values_;
};

}  // namespace anmod
