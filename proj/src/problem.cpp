#include "anmod/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace anmod {

const char* to_string(ParameterKind kind) {
    switch (kind) {
        case ParameterKind::targeted: return "targeted";
        case ParameterKind::untargeted: return "untargeted";
        case ParameterKind::derived: return "derived";
    }
    return "?";
}

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::square_mismatch: return "square-system mismatch";
        case ViolationKind::duplicate_name: return "duplicate name";
        case ViolationKind::undeclared_symbol: return "undeclared symbol";
        case ViolationKind::self_reference: return "self reference";
        case ViolationKind::cyclic_derivation: return "cyclic derivation";
        case ViolationKind::zero_target: return "zero target";
        case ViolationKind::invalid_bounds: return "invalid bounds";
        case ViolationKind::missing_model: return "missing model";
        case ViolationKind::unexpected_model: return "unexpected model";
        case ViolationKind::derivation_uses_variable: return "derivation uses design variable";
        case ViolationKind::unused_variable: return "unused design variable";
    }
    return "?";
}

const DesignVariable* ProblemFormulation::find_variable(std::string_view n) const {
    for (const auto& v : design_variables)
        if (v.name == n) return &v;
    return nullptr;
}

const Parameter* ProblemFormulation::find_parameter(std::string_view n) const {
    for (const auto& p : parameters)
        if (p.name == n) return &p;
    return nullptr;
}

std::optional<std::size_t> ProblemFormulation::variable_index(std::string_view n) const {
    for (std::size_t j = 0; j < design_variables.size(); ++j)
        if (design_variables[j].name == n) return j;
    return std::nullopt;
}

std::vector<std::size_t> ProblemFormulation::targeted_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < parameters.size(); ++i)
        if (parameters[i].kind == ParameterKind::targeted) out.push_back(i);
    return out;
}

DesignPoint ProblemFormulation::initial_point() const {
    DesignPoint x;
    for (const auto& v : design_variables) x.set(v.name, v.value);
    return x;
}

ParameterVector ProblemFormulation::targets() const {
    ParameterVector t;
    for (const auto& p : parameters)
        if (p.kind == ParameterKind::targeted && p.target) t.set(p.name, *p.target);
    return t;
}

SymbolKind ProblemFormulation::symbol_kind(std::string_view n) const {
    if (find_variable(n)) return SymbolKind::design_variable;
    if (find_parameter(n)) return SymbolKind::parameter;
    return SymbolKind::unresolved;
}

bool ValidationReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_string() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << "- " << anmod::to_string(v.kind) << ": " << v.message << '\n';
    return os.str();
}

InvalidProblem::InvalidProblem(ValidationReport report)
    : std::runtime_error("invalid problem formulation:\n" + report.to_string()), report_(std::move(report)) {}

FactorizationError::FactorizationError(std::string message, std::vector<std::string> members)
    : std::runtime_error(std::move(message)), members_(std::move(members)) {}

namespace {

std::string list(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

// Derived-parameter dependency edges: derived name -> referenced derived names.
std::map<std::string, std::vector<std::string>> derived_edges(const ProblemFormulation& pf) {
    std::map<std::string, std::vector<std::string>> edges;
    for (const auto& p : pf.parameters) {
        if (p.kind != ParameterKind::derived || !p.derivation) continue;
        auto& out = edges[p.name];
        for (const auto& ref : p.derivation->referenced_names()) {
            const Parameter* q = pf.find_parameter(ref);
            if (q && q->kind == ParameterKind::derived) out.push_back(ref);
        }
    }
    return edges;
}

// Kahn's algorithm in declaration order. Returns the names left in cycles.
std::vector<std::string> order_derived(const ProblemFormulation& pf, std::vector<std::size_t>& order) {
    auto edges = derived_edges(pf);
    std::set<std::string> done;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < pf.parameters.size(); ++i)
        if (pf.parameters[i].kind == ParameterKind::derived) pending.push_back(i);
    bool progressed = true;
    while (!pending.empty() && progressed) {
        progressed = false;
        for (auto it = pending.begin(); it != pending.end();) {
            const auto& name = pf.parameters[*it].name;
            const auto& deps = edges[name];
            const bool ready = std::all_of(deps.begin(), deps.end(), [&](const auto& d) { return done.count(d); });
            if (ready) {
                order.push_back(*it);
                done.insert(name);
                it = pending.erase(it);
                progressed = true;
            } else {
                ++it;
            }
        }
    }
    std::vector<std::string> cyclic;
    for (auto i : pending) cyclic.push_back(pf.parameters[i].name);
    return cyclic;
}

}  // namespace

ValidationReport validate(const ProblemFormulation& pf) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::string message, std::vector<std::string> symbols = {}) {
        report.violations.push_back({kind, std::move(message), std::move(symbols)});
    };

    std::map<std::string, int> seen;
    for (const auto& v : pf.design_variables) ++seen[v.name];
    for (const auto& p : pf.parameters) ++seen[p.name];
    for (const auto& [name, count] : seen)
        if (count > 1) add(ViolationKind::duplicate_name, "'" + name + "' declared " + std::to_string(count) + " times", {name});

    for (const auto& v : pf.design_variables) {
        const bool finite = std::isfinite(v.value) && std::isfinite(v.lower_bound) && std::isfinite(v.upper_bound);
        if (!finite || !(v.lower_bound < v.upper_bound) || v.value < v.lower_bound || v.value > v.upper_bound) {
            std::ostringstream os;
            os << "'" << v.name << "' value " << v.value << " with bounds [" << v.lower_bound << ", " << v.upper_bound << "]";
            add(ViolationKind::invalid_bounds, os.str(), {v.name});
        }
    }

    std::size_t targeted = 0;
    std::set<std::string> used_variables;
    auto check_refs = [&](const Parameter& p, const ModelExpression& expr, bool allow_variables) {
        for (const auto& ref : expr.referenced_names()) {
            const SymbolKind kind = pf.symbol_kind(ref);
            if (kind == SymbolKind::unresolved) {
                add(ViolationKind::undeclared_symbol, "'" + p.name + "' references undeclared '" + ref + "'", {ref});
            } else if (ref == p.name) {
                add(ViolationKind::self_reference, "'" + p.name + "' references itself", {ref});
            } else if (kind == SymbolKind::design_variable) {
                if (allow_variables) {
                    used_variables.insert(ref);
                } else {
                    add(ViolationKind::derivation_uses_variable,
                        "derivation of '" + p.name + "' references design variable '" + ref + "'", {p.name, ref});
                }
            }
        }
    };

    for (const auto& p : pf.parameters) {
        switch (p.kind) {
            case ParameterKind::targeted:
                ++targeted;
                if (!p.target) add(ViolationKind::missing_model, "targeted '" + p.name + "' has no target", {p.name});
                else if (*p.target == 0.0 || !std::isfinite(*p.target))
                    add(ViolationKind::zero_target, "'" + p.name + "' has a zero or non-finite target", {p.name});
                if (!p.model) add(ViolationKind::missing_model, "targeted '" + p.name + "' has no model", {p.name});
                else check_refs(p, *p.model, true);
                if (p.derivation) add(ViolationKind::unexpected_model, "targeted '" + p.name + "' also has a derivation", {p.name});
                break;
            case ParameterKind::untargeted:
                if (p.model || p.target || p.derivation)
                    add(ViolationKind::unexpected_model, "untargeted '" + p.name + "' carries a model, target or derivation", {p.name});
                break;
            case ParameterKind::derived:
                if (!p.derivation) add(ViolationKind::missing_model, "derived '" + p.name + "' has no derivation", {p.name});
                else check_refs(p, *p.derivation, false);
                if (p.model || p.target)
                    add(ViolationKind::unexpected_model, "derived '" + p.name + "' carries a model or target", {p.name});
                break;
        }
    }

    if (targeted != pf.design_variables.size()) {
        add(ViolationKind::square_mismatch,
            std::to_string(targeted) + " targeted parameters but " + std::to_string(pf.design_variables.size()) +
                " design variables");
    }

    for (const auto& v : pf.design_variables)
        if (!used_variables.count(v.name))
            add(ViolationKind::unused_variable, "'" + v.name + "' appears in no model", {v.name});

    std::vector<std::size_t> order;
    auto cyclic = order_derived(pf, order);
    if (!cyclic.empty()) add(ViolationKind::cyclic_derivation, "cycle among " + list(cyclic), cyclic);

    return report;
}

ProblemFormulation prepare(ProblemFormulation pf) {
    auto report = validate(pf);
    if (!report.ok()) throw InvalidProblem(std::move(report));
    auto lookup = [&pf](std::string_view n) { return pf.symbol_kind(n); };
    for (auto& p : pf.parameters) {
        if (p.model) p.model = p.model->bind(lookup);
        if (p.derivation) p.derivation = p.derivation->bind(lookup);
    }
    return pf;
}

std::vector<Block> factorize(const ProblemFormulation& pf) {
    const auto targeted = pf.targeted_indices();
    std::map<std::size_t, std::vector<std::size_t>> deps;  // parameter -> variable indices
    for (auto i : targeted) {
        auto& d = deps[i];
        for (const auto& name : pf.parameters[i].model->free_variables().design_variables)
            d.push_back(*pf.variable_index(name));
        std::sort(d.begin(), d.end());
    }

    std::vector<bool> var_assigned(pf.design_variables.size(), false);
    std::set<std::size_t> remaining(targeted.begin(), targeted.end());
    std::vector<Block> blocks;
    int rank = 0;

    auto unassigned_of = [&](std::size_t i) {
        std::vector<std::size_t> out;
        for (auto j : deps[i])
            if (!var_assigned[j]) out.push_back(j);
        return out;
    };

    auto over_determined = [&] {
        for (auto i : remaining) {
            if (unassigned_of(i).empty()) {
                throw FactorizationError("structurally unsolvable: '" + pf.parameters[i].name +
                                             "' has no free design variable left",
                                         {pf.parameters[i].name});
            }
        }
    };

    // Peel rounds of one-dimensional blocks.
    for (;;) {
        over_determined();
        std::vector<Block> round;
        std::set<std::size_t> claimed;
        for (auto i : targeted) {
            if (!remaining.count(i)) continue;
            auto free = unassigned_of(i);
            if (free.size() == 1 && !claimed.count(free[0])) {
                claimed.insert(free[0]);
                round.push_back(Block{{i}, {free[0]}, rank});
            }
        }
        if (round.empty()) break;
        for (const auto& b : round) {
            remaining.erase(b.parameter_indices[0]);
            var_assigned[b.variable_indices[0]] = true;
            blocks.push_back(b);
        }
        ++rank;
    }

    // Joint blocks: connected components over the remaining bipartite graph.
    std::set<std::size_t> leftover_vars;
    for (std::size_t j = 0; j < var_assigned.size(); ++j)
        if (!var_assigned[j]) leftover_vars.insert(j);

    std::set<std::size_t> visited_params;
    for (auto seed : targeted) {
        if (!remaining.count(seed) || visited_params.count(seed)) continue;
        std::set<std::size_t> params{seed};
        std::set<std::size_t> vars;
        std::vector<std::size_t> stack{seed};
        visited_params.insert(seed);
        while (!stack.empty()) {
            const auto i = stack.back();
            stack.pop_back();
            for (auto j : unassigned_of(i)) {
                if (!vars.insert(j).second) continue;
                for (auto k : remaining) {
                    if (visited_params.count(k)) continue;
                    const auto fk = unassigned_of(k);
                    if (std::find(fk.begin(), fk.end(), j) != fk.end()) {
                        visited_params.insert(k);
                        params.insert(k);
                        stack.push_back(k);
                    }
                }
            }
        }
        if (params.size() != vars.size()) {
            std::vector<std::string> members;
            for (auto i : params) members.push_back(pf.parameters[i].name);
            for (auto j : vars) members.push_back(pf.design_variables[j].name);
            throw FactorizationError("structurally unsolvable component with " + std::to_string(params.size()) +
                                         " parameters and " + std::to_string(vars.size()) + " variables: " + list(members),
                                     members);
        }
        for (auto j : vars) leftover_vars.erase(j);
        blocks.push_back(Block{{params.begin(), params.end()}, {vars.begin(), vars.end()}, rank});
    }

    if (!leftover_vars.empty()) {
        std::vector<std::string> members;
        for (auto j : leftover_vars) members.push_back(pf.design_variables[j].name);
        throw FactorizationError("design variables not reached by any model: " + list(members), members);
    }
    return blocks;
}

std::vector<std::size_t> derived_order(const ProblemFormulation& pf) {
    std::vector<std::size_t> order;
    auto cyclic = order_derived(pf, order);
    if (!cyclic.empty()) {
        ValidationReport report;
        report.violations.push_back({ViolationKind::cyclic_derivation, "cycle among " + list(cyclic), cyclic});
        throw InvalidProblem(std::move(report));
    }
    return order;
}

ParameterVector resolve_derived(const ProblemFormulation& pf, const ParameterVector& y) {
    ParameterVector out = y;
    Environment env;
    env.parameter_values = y.map();
    for (auto i : derived_order(pf)) {
        const auto& p = pf.parameters[i];
        const double v = evaluate(*p.derivation, env);
        out.set(p.name, v);
        env.parameter_values.insert_or_assign(p.name, v);
    }
    return out;
}

}  // namespace anmod
