#include "anmod/expression.hpp"

#include <cctype>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <system_error>

namespace anmod {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
    : std::runtime_error("parse error at byte " + std::to_string(offset) + ": " + message +
                         (expected.empty() ? "" : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownFunctionError::UnknownFunctionError(std::string name, std::size_t offset)
    : ParseError("unknown function '" + name + "'", offset, {"sqrt", "abs"}), name_(std::move(name)) {}

BindError::BindError(std::string symbol)
    : std::runtime_error("undeclared symbol '" + symbol + "'"), symbol_(std::move(symbol)) {}

const char* to_string(EvaluationFault fault) {
    switch (fault) {
        case EvaluationFault::unbound_variable: return "unbound variable";
        case EvaluationFault::division_by_zero: return "division by zero";
        case EvaluationFault::negative_sqrt: return "sqrt of negative value";
        case EvaluationFault::non_finite: return "non-finite result";
    }
    return "unknown fault";
}

EvaluationError::EvaluationError(EvaluationFault fault, std::string detail)
    : std::runtime_error(std::string(to_string(fault)) + ": " + detail),
      fault_(fault),
      detail_(std::move(detail)) {}

NodePtr make_constant(double value) { return std::make_shared<const Node>(Node{Constant{value}}); }
NodePtr make_reference(std::string name, SymbolKind kind) {
    return std::make_shared<const Node>(Node{Reference{std::move(name), kind}});
}
NodePtr make_negate(NodePtr operand) { return std::make_shared<const Node>(Node{Negate{std::move(operand)}}); }
NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
    return std::make_shared<const Node>(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}
NodePtr make_call(Function fn, NodePtr argument) {
    return std::make_shared<const Node>(Node{Call{fn, std::move(argument)}});
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        [&](const auto& lhs) -> bool {
            using T = std::decay_t<decltype(lhs)>;
            const auto& rhs = std::get<T>(b.data);
            if constexpr (std::is_same_v<T, Constant>) {
                return lhs.value == rhs.value;
            } else if constexpr (std::is_same_v<T, Reference>) {
                return lhs.name == rhs.name && lhs.kind == rhs.kind;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return structurally_equal(*lhs.operand, *rhs.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return lhs.op == rhs.op && structurally_equal(*lhs.lhs, *rhs.lhs) &&
                       structurally_equal(*lhs.rhs, *rhs.rhs);
            } else {
                return lhs.fn == rhs.fn && structurally_equal(*lhs.argument, *rhs.argument);
            }
        },
        a.data);
}

// ---------------------------------------------------------------------------
// Parser
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative through unary
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        skip_space();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_, {"number", "identifier", "(", "-"});
        auto root = parse_expr();
        skip_space();
        if (pos_ < src_.size()) {
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_,
                             {"operator", "end of input"});
        }
        return root;
    }

private:
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, std::vector<std::string> alternatives) {
        if (!accept(c)) {
            throw ParseError(pos_ < src_.size() ? std::string("unexpected '") + src_[pos_] + "'"
                                                : "unexpected end of input",
                             pos_, std::move(alternatives));
        }
    }

    NodePtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = make_binary(BinaryOp::add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = make_binary(BinaryOp::sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = make_binary(BinaryOp::mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = make_binary(BinaryOp::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) return make_negate(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        if (accept('^')) return make_binary(BinaryOp::pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_space();
        if (pos_ >= src_.size()) {
            throw ParseError("unexpected end of input", pos_, {"number", "identifier", "(", "-"});
        }
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_expr();
            expect(')', {")"});
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_, {"number", "identifier", "(", "-"});
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError("malformed number", start, {"digit"});
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError("malformed exponent", pos_, {"digit"});
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
        if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
            throw ParseError("number out of range", start, {});
        }
        return make_constant(value);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        std::string name(src_.substr(start, pos_ - start));
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            Function fn;
            if (name == "sqrt") {
                fn = Function::sqrt;
            } else if (name == "abs") {
                fn = Function::abs;
            } else {
                throw UnknownFunctionError(name, start);
            }
            ++pos_;
            auto argument = parse_expr();
            expect(')', {")"});
            return make_call(fn, argument);
        }
        return make_reference(std::move(name));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Serializer

enum Precedence { additive = 1, multiplicative = 2, unary = 3, power = 4, atom = 5 };

int precedence(const Node& node) {
    if (const auto* b = std::get_if<Binary>(&node.data)) {
        switch (b->op) {
            case BinaryOp::add:
            case BinaryOp::sub: return additive;
            case BinaryOp::mul:
            case BinaryOp::div: return multiplicative;
            case BinaryOp::pow: return power;
        }
    }
    if (std::holds_alternative<Negate>(node.data)) return unary;
    return atom;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string wrap_if(bool cond, std::string s) { return cond ? "(" + s + ")" : s; }

void render(const Node& node, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                out += format_number(n.value);
            } else if constexpr (std::is_same_v<T, Reference>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += '-';
                out += wrap_if(precedence(*n.operand) < unary, serialize(*n.operand));
            } else if constexpr (std::is_same_v<T, Binary>) {
                const int p = precedence(node);
                const int lp = precedence(*n.lhs);
                const int rp = precedence(*n.rhs);
                if (n.op == BinaryOp::pow) {
                    // Base must be an atom; the exponent is parsed as a unary.
                    out += wrap_if(lp < atom, serialize(*n.lhs));
                    out += '^';
                    out += wrap_if(rp < unary, serialize(*n.rhs));
                    return;
                }
                const char* sym = n.op == BinaryOp::add   ? " + "
                                  : n.op == BinaryOp::sub ? " - "
                                  : n.op == BinaryOp::mul ? " * "
                                                          : " / ";
                out += wrap_if(lp < p, serialize(*n.lhs));
                out += sym;
                out += wrap_if(rp <= p, serialize(*n.rhs));
            } else {
                out += n.fn == Function::sqrt ? "sqrt(" : "abs(";
                render(*n.argument, out);
                out += ')';
            }
        },
        node.data);
}

// ---------------------------------------------------------------------------
// Evaluation

const double* lookup(const Environment& env, const Reference& ref) {
    auto find_in = [&](const auto& map) -> const double* {
        auto it = map.find(ref.name);
        return it == map.end() ? nullptr : &it->second;
    };
    switch (ref.kind) {
        case SymbolKind::design_variable: return find_in(env.design_values);
        case SymbolKind::parameter: return find_in(env.parameter_values);
        case SymbolKind::unresolved:
            if (const double* v = find_in(env.design_values)) return v;
            return find_in(env.parameter_values);
    }
    return nullptr;
}

double checked(double v, const Node& node) {
    if (!std::isfinite(v)) throw EvaluationError(EvaluationFault::non_finite, serialize(node));
    return v;
}

double eval(const Node& node, const Environment& env) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, Reference>) {
                const double* v = lookup(env, n);
                if (!v) throw EvaluationError(EvaluationFault::unbound_variable, n.name);
                return checked(*v, node);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval(*n.operand, env);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const double a = eval(*n.lhs, env);
                const double b = eval(*n.rhs, env);
                switch (n.op) {
                    case BinaryOp::add: return checked(a + b, node);
                    case BinaryOp::sub: return checked(a - b, node);
                    case BinaryOp::mul: return checked(a * b, node);
                    case BinaryOp::div:
                        if (b == 0.0) throw EvaluationError(EvaluationFault::division_by_zero, serialize(node));
                        return checked(a / b, node);
                    case BinaryOp::pow: return checked(std::pow(a, b), node);
                }
                return 0.0;
            } else {
                const double a = eval(*n.argument, env);
                if (n.fn == Function::abs) return std::abs(a);
                if (a < 0.0) throw EvaluationError(EvaluationFault::negative_sqrt, serialize(node));
                return std::sqrt(a);
            }
        },
        node.data);
}

NodePtr rebind(const NodePtr& node, const std::function<SymbolKind(std::string_view)>& lookup_kind) {
    return std::visit(
        [&](const auto& n) -> NodePtr {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return node;
            } else if constexpr (std::is_same_v<T, Reference>) {
                const SymbolKind kind = lookup_kind(n.name);
                if (kind == SymbolKind::unresolved) throw BindError(n.name);
                return make_reference(n.name, kind);
            } else if constexpr (std::is_same_v<T, Negate>) {
                return make_negate(rebind(n.operand, lookup_kind));
            } else if constexpr (std::is_same_v<T, Binary>) {
                return make_binary(n.op, rebind(n.lhs, lookup_kind), rebind(n.rhs, lookup_kind));
            } else {
                return make_call(n.fn, rebind(n.argument, lookup_kind));
            }
        },
        node->data);
}

template <typename F>
void for_each_reference(const Node& node, F&& f) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Reference>) {
                f(n);
            } else if constexpr (std::is_same_v<T, Negate>) {
                for_each_reference(*n.operand, f);
            } else if constexpr (std::is_same_v<T, Binary>) {
                for_each_reference(*n.lhs, f);
                for_each_reference(*n.rhs, f);
            } else if constexpr (std::is_same_v<T, Call>) {
                for_each_reference(*n.argument, f);
            }
        },
        node.data);
}

}  // namespace

ModelExpression::ModelExpression(NodePtr root, std::string source_text)
    : root_(std::move(root)), source_(std::move(source_text)) {}

ModelExpression ModelExpression::bind(const std::function<SymbolKind(std::string_view)>& lookup_kind) const {
    return ModelExpression(rebind(root_, lookup_kind), source_);
}

FreeVariables ModelExpression::free_variables() const {
    FreeVariables out;
    for_each_reference(*root_, [&](const Reference& ref) {
        switch (ref.kind) {
            case SymbolKind::design_variable: out.design_variables.insert(ref.name); break;
            case SymbolKind::parameter: out.parameters.insert(ref.name); break;
            case SymbolKind::unresolved: throw BindError(ref.name);
        }
    });
    return out;
}

std::set<std::string> ModelExpression::referenced_names() const {
    std::set<std::string> out;
    for_each_reference(*root_, [&](const Reference& ref) { out.insert(ref.name); });
    return out;
}

ModelExpression parse(std::string_view source) {
    Parser parser(source);
    return ModelExpression(parser.parse_all(), std::string(source));
}

std::string serialize(const Node& node) {
    std::string out;
    render(node, out);
    return out;
}

double evaluate(const ModelExpression& expr, const Environment& env) { return eval(expr.root(), env); }

}  // namespace anmod

namespace anmod {

CompiledExpression::CompiledExpression(const ModelExpression& expr,
                                       const std::function<int(std::string_view)>& slot_of)
    : root_(expr.root_ptr()) {
    emit(*root_, slot_of);
    std::size_t depth = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::constant:
            case Op::load:
            case Op::missing: ++depth; break;
            case Op::add:
            case Op::sub:
            case Op::mul:
            case Op::div:
            case Op::pow: --depth; break;
            default: break;
        }
        max_depth_ = std::max(max_depth_, depth);
    }
}

void CompiledExpression::emit(const Node& node, const std::function<int(std::string_view)>& slot_of) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Constant>) {
                code_.push_back({Op::constant, 0, n.value, &node});
            } else if constexpr (std::is_same_v<T, Reference>) {
                const int slot = slot_of(n.name);
                if (slot < 0) {
                    missing_.push_back(n.name);
                    code_.push_back({Op::missing, static_cast<int>(missing_.size() - 1), 0.0, &node});
                } else {
                    code_.push_back({Op::load, slot, 0.0, &node});
                }
            } else if constexpr (std::is_same_v<T, Negate>) {
                emit(*n.operand, slot_of);
                code_.push_back({Op::neg, 0, 0.0, &node});
            } else if constexpr (std::is_same_v<T, Binary>) {
                emit(*n.lhs, slot_of);
                emit(*n.rhs, slot_of);
                static constexpr Op ops[] = {Op::add, Op::sub, Op::mul, Op::div, Op::pow};
                code_.push_back({ops[static_cast<int>(n.op)], 0, 0.0, &node});
            } else {
                emit(*n.argument, slot_of);
                code_.push_back({n.fn == Function::sqrt ? Op::sqrt : Op::abs, 0, 0.0, &node});
            }
        },
        node.data);
}

double CompiledExpression::operator()(std::span<const double> first, std::span<const double> second) const {
    double small[64] = {};
    std::vector<double> large;
    double* stack = small;
    if (max_depth_ > 64) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t top = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::constant: stack[top++] = in.value; break;
            case Op::load: {
                const auto slot = static_cast<std::size_t>(in.slot);
                stack[top++] = checked(slot < first.size() ? first[slot] : second[slot - first.size()], *in.node);
                break;
            }
            case Op::missing:
                throw EvaluationError(EvaluationFault::unbound_variable, missing_[static_cast<std::size_t>(in.slot)]);
            case Op::neg: stack[top - 1] = -stack[top - 1]; break;
            case Op::add: --top; stack[top - 1] = checked(stack[top - 1] + stack[top], *in.node); break;
            case Op::sub: --top; stack[top - 1] = checked(stack[top - 1] - stack[top], *in.node); break;
            case Op::mul: --top; stack[top - 1] = checked(stack[top - 1] * stack[top], *in.node); break;
            case Op::div:
                --top;
                if (stack[top] == 0.0) throw EvaluationError(EvaluationFault::division_by_zero, serialize(*in.node));
                stack[top - 1] = checked(stack[top - 1] / stack[top], *in.node);
                break;
            case Op::pow: --top; stack[top - 1] = checked(std::pow(stack[top - 1], stack[top]), *in.node); break;
            case Op::sqrt:
                if (stack[top - 1] < 0.0) throw EvaluationError(EvaluationFault::negative_sqrt, serialize(*in.node));
                stack[top - 1] = std::sqrt(stack[top - 1]);
                break;
            case Op::abs: stack[top - 1] = std::abs(stack[top - 1]); break;
        }
    }
    return stack[0];
}

}  // namespace anmod
