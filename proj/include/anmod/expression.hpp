#pragma once

// Arithmetic model expressions: parsing, binding, evaluation and
// dependency inspection. Nodes are immutable and shared, so a bound
// expression can be evaluated concurrently from any number of threads.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace anmod {

/// Which namespace a named reference resolves to. `unresolved` until bind().
enum class SymbolKind { unresolved, design_variable, parameter };

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sqrt, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
    double value;
};
struct Reference {
    std::string name;
    SymbolKind kind = SymbolKind::unresolved;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    NodePtr argument;
};

struct Node {
    std::variant<Constant, Reference, Negate, Binary, Call> data;
};

/// Structural comparison. Reference kinds are compared too.
bool structurally_equal(const Node& a, const Node& b);

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset, std::vector<std::string> expected);

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownFunctionError : public ParseError {
public:
    UnknownFunctionError(std::string name, std::size_t offset);
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Raised by bind() for names that are not declared.
class BindError : public std::runtime_error {
public:
    explicit BindError(std::string symbol);
    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

enum class EvaluationFault { unbound_variable, division_by_zero, negative_sqrt, non_finite };

const char* to_string(EvaluationFault fault);

class EvaluationError : public std::runtime_error {
public:
    EvaluationError(EvaluationFault fault, std::string detail);
    EvaluationFault fault() const noexcept { return fault_; }
    /// The missing symbol for unbound_variable, otherwise the offending sub-expression.
    const std::string& detail() const noexcept { return detail_; }

private:
    EvaluationFault fault_;
    std::string detail_;
};

struct Environment {
    std::map<std::string, double, std::less<>> design_values;
    std::map<std::string, double, std::less<>> parameter_values;
};

struct FreeVariables {
    std::set<std::string> design_variables;
    std::set<std::string> parameters;

    bool operator==(const FreeVariables&) const = default;
};

/// A parsed model expression together with the text it came from.
class ModelExpression {
public:
    ModelExpression() = default;
    ModelExpression(NodePtr root, std::string source_text);

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const noexcept { return root_; }
    const std::string& source_text() const noexcept { return source_; }
    bool empty() const noexcept { return root_ == nullptr; }

    /// Returns a copy with every reference tagged by `lookup`. Throws BindError
    /// when `lookup` reports a name as unresolved.
    ModelExpression bind(const std::function<SymbolKind(std::string_view)>& lookup) const;

    /// Referenced names partitioned by their bound kind. Unresolved references
    /// are reported as a BindError.
    FreeVariables free_variables() const;

    /// Every referenced name, regardless of kind.
    std::set<std::string> referenced_names() const;

    friend bool operator==(const ModelExpression& a, const ModelExpression& b) {
        if (!a.root_ || !b.root_) return a.root_ == b.root_;
        return structurally_equal(*a.root_, *b.root_);
    }

private:
    NodePtr root_;
    std::string source_;
};

ModelExpression parse(std::string_view source);

/// Minimal-parenthesis rendering that parses back to the same tree.
std::string serialize(const Node& node);
inline std::string serialize(const ModelExpression& expr) { return serialize(expr.root()); }

double evaluate(const ModelExpression& expr, const Environment& env);

/// Flat postfix program with references resolved to slot indices. Same
/// results and error semantics as evaluate(), without name lookups.
class CompiledExpression {
public:
    CompiledExpression() = default;
    /// `slot_of` maps a referenced name to its slot, or -1 if unknown
    /// (an unknown name raises EvaluationError at evaluation time).
    CompiledExpression(const ModelExpression& expr, const std::function<int(std::string_view)>& slot_of);

    /// Slots below first.size() index `first`, the rest index `second`.
    double operator()(std::span<const double> first, std::span<const double> second = {}) const;

private:
    enum class Op : unsigned char { constant, load, missing, neg, add, sub, mul, div, pow, sqrt, abs };
    struct Instr {
        Op op;
        int slot = 0;
        double value = 0.0;
        const Node* node = nullptr;  // for diagnostics
    };
    void emit(const Node& node, const std::function<int(std::string_view)>& slot_of);

    std::vector<Instr> code_;
    NodePtr root_;  // keeps Instr::node alive
    std::vector<std::string> missing_;
    std::size_t max_depth_ = 0;
};

// Builders, used by tests and by code that assembles expressions directly.
NodePtr make_constant(double value);
NodePtr make_reference(std::string name, SymbolKind kind = SymbolKind::unresolved);
NodePtr make_negate(NodePtr operand);
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs);
NodePtr make_call(Function fn, NodePtr argument);

}  // namespace anmod
