#include "anmod/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "anmod/minimize.hpp"

namespace anmod {

void UpdateSettings::validate() const {
    if (!(adjustment_rate > 0.0 && adjustment_rate <= 1.0))
        throw std::invalid_argument("adjustment_rate must lie in (0, 1]");
    if (!(cost_tolerance > 0.0)) throw std::invalid_argument("cost_tolerance must be positive");
    if (max_cost_evaluations < 1) throw std::invalid_argument("max_cost_evaluations must be at least 1");
    if (!(convergence_tolerance > 0.0)) throw std::invalid_argument("convergence_tolerance must be positive");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (!(divergence_factor > 1.0)) throw std::invalid_argument("divergence_factor must exceed 1");
}

UpdateError::UpdateError(std::string model, std::string detail)
    : std::runtime_error("model of '" + model + "': " + detail), model_(std::move(model)) {}

const char* to_string(SolveMethod method) {
    switch (method) {
        case SolveMethod::fixed_point: return "fixed_point";
        case SolveMethod::closed_form: return "closed_form";
        case SolveMethod::scalar_search: return "scalar_search";
        case SolveMethod::simplex: return "simplex";
    }
    return "?";
}

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::running: return "RUNNING";
        case RunStatus::success: return "SUCCESS";
        case RunStatus::diverged: return "DIVERGED";
        case RunStatus::max_iter: return "MAX_ITER";
        case RunStatus::evaluator_error: return "EVALUATOR_ERROR";
    }
    return "?";
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
    for (auto s : {RunStatus::running, RunStatus::success, RunStatus::diverged, RunStatus::max_iter,
                   RunStatus::evaluator_error})
        if (text == to_string(s)) return s;
    return std::nullopt;
}

ParameterVector target_substitution(const ProblemFormulation& pf, const ParameterVector& y_old) {
    ParameterVector sub;
    for (const auto& p : pf.parameters) {
        if (p.kind == ParameterKind::targeted) {
            sub.set(p.name, *p.target);
        } else if (p.kind == ParameterKind::untargeted && y_old.contains(p.name)) {
            sub.set(p.name, y_old.at(p.name));
        }
    }
    return resolve_derived(pf, sub);
}

namespace {

Environment make_env(const DesignPoint& x, const ParameterVector& y) { return Environment{x.map(), y.map()}; }

double model_value(const Parameter& p, const Environment& env) {
    try {
        return evaluate(*p.model, env);
    } catch (const EvaluationError& e) {
        throw UpdateError(p.name, e.what());
    }
}

double checked_denominator(const Parameter& p, double value) {
    if (value == 0.0 || !std::isfinite(value)) {
        std::ostringstream os;
        os << "denominator f(y_old, x_old) = " << value;
        throw UpdateError(p.name, os.str());
    }
    return value;
}

}  // namespace

ParameterVector predict(const ProblemFormulation& pf, const DesignPoint& x_new, const DesignPoint& x_old,
                        const ParameterVector& y_old, const ParameterVector& y_sub) {
    const auto env_old = make_env(x_old, resolve_derived(pf, y_old));
    const auto env_new = make_env(x_new, y_sub);
    ParameterVector out;
    for (const auto& p : pf.parameters) {
        if (p.kind == ParameterKind::targeted) {
            const double den = checked_denominator(p, model_value(p, env_old));
            out.set(p.name, y_old.at(p.name) * model_value(p, env_new) / den);
        } else if (p.kind == ParameterKind::untargeted && y_old.contains(p.name)) {
            out.set(p.name, y_old.at(p.name));
        }
    }
    return resolve_derived(pf, out);
}

double cost(const ProblemFormulation& pf, const DesignPoint& x, const DesignPoint& x_old,
            const ParameterVector& y_old) {
    const auto env_old = make_env(x_old, resolve_derived(pf, y_old));
    const auto env_new = make_env(x, target_substitution(pf, y_old));
    double total = 0.0;
    for (auto i : pf.targeted_indices()) {
        const auto& p = pf.parameters[i];
        const double den = checked_denominator(p, model_value(p, env_old));
        const double r = (y_old.at(p.name) / *p.target) * model_value(p, env_new) / den - 1.0;
        total += r * r;
    }
    if (!std::isfinite(total)) throw UpdateError("cost", "non-finite cost");
    return total;
}

// ---------------------------------------------------------------------------

CostModel::CostModel(const ProblemFormulation& pf, const DesignPoint& x_old, const ParameterVector& y_old)
    : pf_(&pf), dimension_(pf.design_variables.size()) {
    const std::size_t np = pf.parameters.size();
    const auto y_full = resolve_derived(pf, y_old);
    const auto sub = target_substitution(pf, y_old);

    auto slot_of = [&](std::string_view name) -> int {
        for (std::size_t j = 0; j < dimension_; ++j)
            if (pf.design_variables[j].name == name) return static_cast<int>(j);
        for (std::size_t i = 0; i < np; ++i)
            if (pf.parameters[i].name == name) return static_cast<int>(dimension_ + i);
        return -1;
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> old_params(np, nan);
    substituted_.assign(np, nan);
    for (std::size_t i = 0; i < np; ++i) {
        const auto& name = pf.parameters[i].name;
        if (y_full.contains(name)) old_params[i] = y_full.at(name);
        if (sub.contains(name)) substituted_[i] = sub.at(name);
    }
    const auto x_flat = flatten(x_old);

    terms_.resize(np);
    for (auto i : pf.targeted_indices()) {
        const auto& p = pf.parameters[i];
        Term& t = terms_[i];
        t.model = CompiledExpression(*p.model, slot_of);
        t.target = *p.target;
        if (!y_old.contains(p.name)) throw UpdateError(p.name, "no evaluated value");
        t.y_old = y_old.at(p.name);
        try {
            t.denominator = checked_denominator(p, t.model(x_flat, old_params));
        } catch (const EvaluationError& e) {
            throw UpdateError(p.name, e.what());
        }
        t.active = true;
    }
}

std::vector<double> CostModel::flatten(const DesignPoint& x) const {
    std::vector<double> out(dimension_);
    for (std::size_t j = 0; j < dimension_; ++j) out[j] = x.at(pf_->design_variables[j].name);
    return out;
}

DesignPoint CostModel::unflatten(std::span<const double> x) const {
    DesignPoint out;
    for (std::size_t j = 0; j < dimension_; ++j) out.set(pf_->design_variables[j].name, x[j]);
    return out;
}

double CostModel::model_at_targets(std::size_t i, std::span<const double> x) const {
    try {
        return terms_[i].model(x, substituted_);
    } catch (const EvaluationError& e) {
        throw UpdateError(pf_->parameters[i].name, e.what());
    }
}

double CostModel::predicted(std::size_t i, std::span<const double> x) const {
    const Term& t = terms_[i];
    return t.y_old * model_at_targets(i, x) / t.denominator;
}

double CostModel::residual(std::size_t i, std::span<const double> x) const {
    const Term& t = terms_[i];
    return (t.y_old / t.target) * model_at_targets(i, x) / t.denominator - 1.0;
}

double CostModel::required_model_value(std::size_t i) const {
    const Term& t = terms_[i];
    return t.target * t.denominator / t.y_old;
}

double CostModel::cost(std::span<const double> x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!terms_[i].active) continue;
        const double r = residual(i, x);
        total += r * r;
    }
    if (!std::isfinite(total)) throw UpdateError("cost", "non-finite cost");
    return total;
}

double CostModel::block_cost(const Block& block, std::span<const double> x) const {
    double total = 0.0;
    for (auto i : block.parameter_indices) {
        const double r = residual(i, x);
        total += r * r;
    }
    if (!std::isfinite(total)) throw UpdateError(pf_->parameters[block.parameter_indices.front()].name, "non-finite cost");
    return total;
}

// ---------------------------------------------------------------------------

namespace {

// Closed-form solve for a 1-D block whose model is a power law c * t^p in
// its variable. Returns nothing when the model is not a monomial there.
std::optional<double> monomial_inverse(const CostModel& model, std::size_t param, std::size_t var,
                                       std::vector<double>& x, const DesignVariable& dv) {
    const double t1 = x[var];
    if (!(t1 > 0.0)) return std::nullopt;
    const double t2 = 2.0 * t1 <= dv.upper_bound ? 2.0 * t1 : 0.5 * t1;
    const double t3 = std::sqrt(t1 * t2);
    auto g = [&](double t) {
        x[var] = t;
        return model.model_at_targets(param, x);
    };
    double g1, g2, g3;
    try {
        g1 = g(t1);
        g2 = g(t2);
        g3 = g(t3);
    } catch (const UpdateError&) {
        x[var] = t1;
        return std::nullopt;
    }
    x[var] = t1;
    if (g1 == 0.0 || g2 == 0.0 || g3 == 0.0) return std::nullopt;
    if ((g1 > 0) != (g2 > 0) || (g1 > 0) != (g3 > 0)) return std::nullopt;
    const double exponent = std::log(g2 / g1) / std::log(t2 / t1);
    if (!std::isfinite(exponent) || std::abs(exponent) < 1e-12) return std::nullopt;
    const double expected = g1 * std::pow(t3 / t1, exponent);
    if (std::abs(expected - g3) > 1e-9 * std::abs(g3)) return std::nullopt;

    const double ratio = model.required_model_value(param) / g1;
    if (!(ratio > 0.0)) return std::nullopt;
    const double t = t1 * std::pow(ratio, 1.0 / exponent);
    if (!std::isfinite(t)) return std::nullopt;
    return t;
}

bool at_bound(const DesignVariable& dv, double v) { return v <= dv.lower_bound || v >= dv.upper_bound; }

}  // namespace

BlockSolution minimize_block(const CostModel& model, const Block& block, std::span<const double> base,
                             const UpdateSettings& settings) {
    const auto& pf = model.problem();
    std::vector<double> x(base.begin(), base.end());
    for (auto j : block.variable_indices) x[j] = pf.design_variables[j].clamp(x[j]);

    BlockSolution sol;
    auto collect = [&] {
        sol.values.clear();
        for (auto j : block.variable_indices) sol.values.push_back(x[j]);
    };

    const double start_cost = model.block_cost(block, x);
    sol.cost = start_cost;
    sol.evaluations = 1;
    if (start_cost < settings.cost_tolerance) {
        collect();
        return sol;
    }

    if (block.dimension() == 1 && block.parameter_indices.size() == 1) {
        const auto j = block.variable_indices.front();
        const auto i = block.parameter_indices.front();
        const auto& dv = pf.design_variables[j];
        const double start = x[j];
        if (auto t = monomial_inverse(model, i, j, x, dv)) {
            x[j] = dv.clamp(*t);
            const double c = model.block_cost(block, x);
            if (c <= start_cost) {
                sol.cost = c;
                sol.method = SolveMethod::closed_form;
                sol.evaluations += 4;
                sol.clamped = x[j] != *t && c > settings.cost_tolerance;
                collect();
                return sol;
            }
            x[j] = start;
        }
        MinimizerOptions opts{settings.cost_tolerance, settings.max_cost_evaluations};
        auto f = [&](double t) {
            x[j] = t;
            return model.block_cost(block, x);
        };
        auto res = minimize_scalar(f, start, dv.lower_bound, dv.upper_bound, opts);
        x[j] = res.x.front();
        sol.cost = res.cost;
        sol.method = SolveMethod::scalar_search;
        sol.evaluations += res.evaluations;
        sol.clamped = res.cost > settings.cost_tolerance && at_bound(dv, x[j]);
        collect();
        return sol;
    }

    const std::size_t n = block.dimension();
    std::vector<double> start(n), lower(n), upper(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& dv = pf.design_variables[block.variable_indices[k]];
        start[k] = x[block.variable_indices[k]];
        lower[k] = dv.lower_bound;
        upper[k] = dv.upper_bound;
    }
    auto f = [&](std::span<const double> v) {
        for (std::size_t k = 0; k < n; ++k) x[block.variable_indices[k]] = v[k];
        return model.block_cost(block, x);
    };
    MinimizerOptions opts{settings.cost_tolerance, settings.max_cost_evaluations};
    auto res = minimize_simplex(f, start, lower, upper, opts);
    for (std::size_t k = 0; k < n; ++k) x[block.variable_indices[k]] = res.x[k];
    sol.cost = res.cost;
    sol.method = SolveMethod::simplex;
    sol.evaluations += res.evaluations;
    if (res.cost > settings.cost_tolerance) {
        for (auto j : block.variable_indices)
            if (at_bound(pf.design_variables[j], x[j])) sol.clamped = true;
    }
    collect();
    return sol;
}

BlockSolution minimize_block(const Block& block, const ProblemFormulation& pf, const DesignPoint& x_old,
                             const ParameterVector& y_old, const UpdateSettings& settings) {
    CostModel model(pf, x_old, y_old);
    const auto base = model.flatten(x_old);
    return minimize_block(model, block, base, settings);
}

UpdateResult update_step(const ProblemFormulation& pf, const DesignPoint& x_old, const ParameterVector& y_old,
                         const UpdateSettings& settings) {
    return update_step(pf, factorize(pf), x_old, y_old, settings);
}

UpdateResult update_step(const ProblemFormulation& pf, const std::vector<Block>& blocks, const DesignPoint& x_old,
                         const ParameterVector& y_old, const UpdateSettings& settings) {
    CostModel model(pf, x_old, y_old);
    const auto old_flat = model.flatten(x_old);
    auto x = old_flat;

    UpdateResult result;
    for (const auto& block : blocks) {
        auto sol = minimize_block(model, block, x, settings);
        for (std::size_t k = 0; k < block.variable_indices.size(); ++k) x[block.variable_indices[k]] = sol.values[k];
        result.clamped = result.clamped || sol.clamped;
        result.blocks.push_back(std::move(sol));
    }
    result.x_star = model.unflatten(x);

    const double gamma = settings.adjustment_rate;
    std::vector<double> filtered(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double step = gamma == 1.0 ? x[j] : old_flat[j] + gamma * (x[j] - old_flat[j]);
        filtered[j] = pf.design_variables[j].clamp(step);
    }
    result.x_new = model.unflatten(filtered);
    result.predicted = predict(pf, result.x_new, x_old, y_old, target_substitution(pf, y_old));
    result.cost = model.cost(filtered);
    return result;
}

// ---------------------------------------------------------------------------

std::uint64_t iteration_seed(std::uint64_t run_seed, int k) {
    // splitmix64 finalizer over (seed, k)
    std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double max_relative_error(const ProblemFormulation& pf, const ParameterVector& y) {
    double worst = 0.0;
    for (auto i : pf.targeted_indices()) {
        const auto& p = pf.parameters[i];
        worst = std::max(worst, std::abs(y.at(p.name) / *p.target - 1.0));
    }
    return worst;
}

namespace {

double observed_cost(const ProblemFormulation& pf, const ParameterVector& y) {
    double total = 0.0;
    for (auto i : pf.targeted_indices()) {
        const auto& p = pf.parameters[i];
        const double r = y.at(p.name) / *p.target - 1.0;
        total += r * r;
    }
    return total;
}

std::vector<BlockRecord> describe(const ProblemFormulation& pf, const std::vector<Block>& blocks) {
    std::vector<BlockRecord> out;
    for (const auto& b : blocks) {
        BlockRecord r;
        r.rank = b.solve_order;
        for (auto i : b.parameter_indices) r.parameters.push_back(pf.parameters[i].name);
        for (auto j : b.variable_indices) r.variables.push_back(pf.design_variables[j].name);
        out.push_back(std::move(r));
    }
    return out;
}

// Keeps the declared, non-derived parameters and checks they are all present.
ParameterVector accept_evaluation(const ProblemFormulation& pf, const ParameterVector& raw) {
    ParameterVector y;
    for (const auto& p : pf.parameters) {
        if (p.kind == ParameterKind::derived) continue;
        if (!raw.contains(p.name)) throw EvaluatorError(EvaluatorFault::missing_parameter, p.name);
        const double v = raw.at(p.name);
        if (!std::isfinite(v)) throw EvaluatorError(EvaluatorFault::out_of_domain, p.name + " is not finite");
        y.set(p.name, v);
    }
    return resolve_derived(pf, y);
}

}  // namespace

RunHistory run(const ProblemFormulation& pf, const Evaluator& evaluator, const UpdateSettings& settings,
               std::uint64_t seed, const RunOptions& options) {
    settings.validate();
    RunHistory history;
    history.problem = pf.name;
    history.targets = pf.targets();

    const auto blocks = factorize(pf);
    const auto block_records = describe(pf, blocks);
    DesignPoint x = options.initial ? *options.initial : pf.initial_point();
    for (const auto& v : pf.design_variables) x.set(v.name, v.clamp(x.at(v.name)));

    double initial_error = 0.0;
    std::vector<double> costs;
    std::vector<int> pinned(pf.design_variables.size(), 0);

    auto finish = [&](IterationRecord& rec, RunStatus status, std::string note) {
        rec.status = status;
        rec.note = note;
        history.status = status;
        history.message = std::move(note);
    };

    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.x = x;
        rec.seed = iteration_seed(seed, k);

        try {
            rec.y = accept_evaluation(pf, evaluator.evaluate(x, options.fidelity, rec.seed));
        } catch (const EvaluatorError& e) {
            finish(rec, RunStatus::evaluator_error, e.what());
            history.records.push_back(std::move(rec));
            return history;
        }

        const double err = max_relative_error(pf, rec.y);
        const double observed = observed_cost(pf, rec.y);
        costs.push_back(observed);
        if (k == 0) initial_error = err;
        rec.cost = observed;

        for (std::size_t j = 0; j < pf.design_variables.size(); ++j) {
            const auto& dv = pf.design_variables[j];
            pinned[j] = at_bound(dv, x.at(dv.name)) ? pinned[j] + 1 : 0;
        }
        const bool cost_not_decreasing =
            k >= 2 && costs[k - 2] <= costs[k - 1] && costs[k - 1] <= costs[k];
        const bool stuck = cost_not_decreasing && std::any_of(pinned.begin(), pinned.end(), [](int n) { return n >= 3; });

        if (err < settings.convergence_tolerance) {
            finish(rec, RunStatus::success, "");
        } else if (k > 0 && err > settings.divergence_factor * initial_error) {
            std::ostringstream os;
            os << "max relative error " << err << " exceeds " << settings.divergence_factor << " x initial " << initial_error;
            finish(rec, RunStatus::diverged, os.str());
        } else if (stuck) {
            finish(rec, RunStatus::diverged, "design variable pinned at a bound with non-decreasing cost");
        } else if (k >= settings.max_iterations) {
            finish(rec, RunStatus::max_iter, "");
        }
        if (history.status != RunStatus::running) {
            history.records.push_back(std::move(rec));
            return history;
        }

        try {
            auto upd = update_step(pf, blocks, x, rec.y, settings);
            rec.predicted = std::move(upd.predicted);
            rec.cost = upd.cost;
            rec.blocks = block_records;
            x = std::move(upd.x_new);
        } catch (const UpdateError& e) {
            finish(rec, RunStatus::diverged, std::string("update aborted: ") + e.what());
            history.records.push_back(std::move(rec));
            return history;
        }
        history.records.push_back(std::move(rec));
    }
}

}  // namespace anmod
