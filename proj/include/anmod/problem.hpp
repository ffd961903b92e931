#pragma once

// Problem formulation: design variables, parameters with targets and
// proportionality models, and the decomposition of the update into
// independent square blocks.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "anmod/expression.hpp"
#include "anmod/values.hpp"

namespace anmod {

struct DesignVariable {
    std::string name;
    double value = 0.0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::string unit;

    double clamp(double v) const { return v < lower_bound ? lower_bound : (v > upper_bound ? upper_bound : v); }
};

enum class ParameterKind { targeted, untargeted, derived };

const char* to_string(ParameterKind kind);

struct Parameter {
    std::string name;
    ParameterKind kind = ParameterKind::untargeted;
    std::optional<double> target;
    std::optional<ModelExpression> model;
    std::optional<ModelExpression> derivation;
    std::string unit;
};

struct ProblemFormulation {
    std::string name;
    std::vector<DesignVariable> design_variables;
    std::vector<Parameter> parameters;

    const DesignVariable* find_variable(std::string_view name) const;
    const Parameter* find_parameter(std::string_view name) const;
    std::optional<std::size_t> variable_index(std::string_view name) const;

    /// Indices into `parameters` of the targeted parameters, in declaration order.
    std::vector<std::size_t> targeted_indices() const;

    /// Design point holding every variable's current value.
    DesignPoint initial_point() const;
    /// Targeted parameters bound to their targets.
    ParameterVector targets() const;

    SymbolKind symbol_kind(std::string_view name) const;
};

enum class ViolationKind {
    square_mismatch,
    duplicate_name,
    undeclared_symbol,
    self_reference,
    cyclic_derivation,
    zero_target,
    invalid_bounds,
    missing_model,
    unexpected_model,
    derivation_uses_variable,
    unused_variable,
};

const char* to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
    std::vector<std::string> symbols;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(ViolationKind kind) const;
    std::string to_string() const;
};

ValidationReport validate(const ProblemFormulation& pf);

class InvalidProblem : public std::runtime_error {
public:
    explicit InvalidProblem(ValidationReport report);
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Validates and returns a copy with every model and derivation bound to
/// the declared symbols. Throws InvalidProblem.
ProblemFormulation prepare(ProblemFormulation pf);

struct Block {
    std::vector<std::size_t> parameter_indices;  // into ProblemFormulation::parameters
    std::vector<std::size_t> variable_indices;   // into ProblemFormulation::design_variables
    int solve_order = 0;

    std::size_t dimension() const noexcept { return variable_indices.size(); }
    bool operator==(const Block&) const = default;
};

class FactorizationError : public std::runtime_error {
public:
    FactorizationError(std::string message, std::vector<std::string> members);
    const std::vector<std::string>& members() const noexcept { return members_; }

private:
    std::vector<std::string> members_;
};

/// Splits the targeted parameters and design variables into square blocks
/// listed in a valid solve order. Requires a prepared formulation.
std::vector<Block> factorize(const ProblemFormulation& pf);

/// Derived parameters in an order where each derivation only uses
/// parameters already available. Throws InvalidProblem on a cycle.
std::vector<std::size_t> derived_order(const ProblemFormulation& pf);

/// Returns `y` extended with every derived parameter.
ParameterVector resolve_derived(const ProblemFormulation& pf, const ParameterVector& y);

}  // namespace anmod
