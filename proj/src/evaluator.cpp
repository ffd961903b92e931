#include "anmod/evaluator.hpp"

#include <set>

namespace anmod {

const char* to_string(EvaluatorFault fault) {
    switch (fault) {
        case EvaluatorFault::mode_order: return "mode-order violation";
        case EvaluatorFault::missing_variable: return "missing design variable";
        case EvaluatorFault::out_of_domain: return "design outside model domain";
        case EvaluatorFault::missing_parameter: return "missing parameter";
    }
    return "?";
}

EvaluatorError::EvaluatorError(EvaluatorFault fault, std::string message)
    : std::runtime_error(std::string(to_string(fault)) + ": " + message), fault_(fault) {}

double Evaluator::require(const DesignPoint& x, const std::string& name) {
    if (!x.contains(name)) throw EvaluatorError(EvaluatorFault::missing_variable, name);
    return x.at(name);
}

namespace {

std::vector<std::size_t> evaluation_order(const ProblemFormulation& pf) {
    std::vector<std::size_t> order;
    std::set<std::string> ready;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < pf.parameters.size(); ++i) {
        if (pf.parameters[i].kind == ParameterKind::untargeted) {
            ready.insert(pf.parameters[i].name);
        } else {
            pending.push_back(i);
        }
    }
    bool progressed = true;
    while (!pending.empty() && progressed) {
        progressed = false;
        for (auto it = pending.begin(); it != pending.end();) {
            const auto& p = pf.parameters[*it];
            const auto& expr = p.kind == ParameterKind::derived ? *p.derivation : *p.model;
            bool ok = true;
            for (const auto& name : expr.free_variables().parameters) ok = ok && ready.count(name);
            if (ok) {
                order.push_back(*it);
                ready.insert(p.name);
                it = pending.erase(it);
                progressed = true;
            } else {
                ++it;
            }
        }
    }
    if (!pending.empty()) {
        throw std::invalid_argument("perfect-model evaluator: models reference each other cyclically (" +
                                    pf.parameters[pending.front()].name + ")");
    }
    return order;
}

}  // namespace

PerfectModelEvaluator::PerfectModelEvaluator(ProblemFormulation pf, std::map<std::string, double> scales,
                                             std::map<std::string, double> untargeted_values)
    : pf_(std::move(pf)), scales_(std::move(scales)), untargeted_(std::move(untargeted_values)) {
    order_ = evaluation_order(pf_);
}

std::vector<std::string> PerfectModelEvaluator::variable_names() const {
    std::vector<std::string> out;
    for (const auto& v : pf_.design_variables) out.push_back(v.name);
    return out;
}

std::vector<std::string> PerfectModelEvaluator::parameter_names() const {
    std::vector<std::string> out;
    for (const auto& p : pf_.parameters)
        if (p.kind != ParameterKind::derived) out.push_back(p.name);
    return out;
}

double PerfectModelEvaluator::scale(const std::string& parameter) const {
    auto it = scales_.find(parameter);
    return it == scales_.end() ? 1.0 : it->second;
}

ParameterVector PerfectModelEvaluator::evaluate(const DesignPoint& x, int, std::uint64_t) const {
    Environment env;
    for (const auto& v : pf_.design_variables) env.design_values[v.name] = require(x, v.name);
    for (const auto& p : pf_.parameters) {
        if (p.kind != ParameterKind::untargeted) continue;
        auto it = untargeted_.find(p.name);
        env.parameter_values[p.name] = it == untargeted_.end() ? 1.0 : it->second;
    }
    ParameterVector y;
    for (auto i : order_) {
        const auto& p = pf_.parameters[i];
        double value = 0.0;
        try {
            value = p.kind == ParameterKind::derived ? anmod::evaluate(*p.derivation, env)
                                                     : scale(p.name) * anmod::evaluate(*p.model, env);
        } catch (const EvaluationError& e) {
            throw EvaluatorError(EvaluatorFault::out_of_domain, p.name + ": " + e.what());
        }
        env.parameter_values[p.name] = value;
        if (p.kind != ParameterKind::derived) y.set(p.name, value);
    }
    for (const auto& p : pf_.parameters)
        if (p.kind == ParameterKind::untargeted) y.set(p.name, env.parameter_values.at(p.name));
    return y;
}

std::map<std::string, double> PerfectModelEvaluator::scales_for_solution(const ProblemFormulation& pf,
                                                                         const DesignPoint& x_solution) {
    Environment env;
    env.design_values = x_solution.map();
    env.parameter_values = resolve_derived(pf, pf.targets()).map();
    std::map<std::string, double> scales;
    for (auto i : pf.targeted_indices()) {
        const auto& p = pf.parameters[i];
        scales[p.name] = *p.target / anmod::evaluate(*p.model, env);
    }
    return scales;
}

std::vector<std::string> ConstantEvaluator::parameter_names() const {
    std::vector<std::string> out;
    for (const auto& [name, value] : values_) out.push_back(name);
    return out;
}

}  // namespace anmod
