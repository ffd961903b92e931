#include "anmod/studies.hpp"

#include <omp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "anmod/history.hpp"
#include "anmod/minimize.hpp"

namespace anmod {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string run_dir_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", index);
    return buf;
}

}  // namespace

std::vector<DesignPoint> sample_initial_points(const ProblemFormulation& pf, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<DesignPoint> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        DesignPoint x;
        for (const auto& v : pf.design_variables) x.set(v.name, v.lower_bound + unit(rng) * (v.upper_bound - v.lower_bound));
        out.push_back(std::move(x));
    }
    return out;
}

int BatchResult::count(RunStatus status) const {
    int n = 0;
    for (const auto& r : runs) n += r.history.status == status;
    return n;
}

double BatchResult::success_fraction() const {
    return runs.empty() ? 0.0 : static_cast<double>(count(RunStatus::success)) / static_cast<double>(runs.size());
}

std::map<int, int> BatchResult::iteration_histogram() const {
    std::map<int, int> h;
    for (const auto& r : runs)
        if (r.history.status == RunStatus::success) ++h[r.history.iterations()];
    return h;
}

BatchResult run_batch(const RunConfig& cfg, const Evaluator& evaluator, int n, std::uint64_t master_seed,
                      Execution execution) {
    BatchResult batch;
    const auto starts = sample_initial_points(cfg.problem, n, master_seed);
    batch.runs.resize(starts.size());
    std::vector<std::exception_ptr> errors(starts.size());

    auto one = [&](int i) {
        try {
            auto& r = batch.runs[i];
            r.index = i;
            r.seed = master_seed + static_cast<std::uint64_t>(i);
            r.initial = starts[i];
            RunOptions opts;
            opts.fidelity = cfg.fidelity();
            opts.initial = starts[i];
            r.history = run(cfg.problem, evaluator, cfg.optimizer, r.seed, opts);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const int count = static_cast<int>(starts.size());
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < count; ++i) one(i);
    } else {
        for (int i = 0; i < count; ++i) one(i);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return batch;
}

void save_batch(const std::filesystem::path& dir, const BatchResult& batch, const RunConfig& cfg) {
    std::filesystem::create_directories(dir);
    const int count = static_cast<int>(batch.runs.size());
    std::vector<std::exception_ptr> errors(batch.runs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
        try {
            RunConfig per_run = cfg;
            per_run.seed = batch.runs[i].seed;
            save_run(dir / run_dir_name(i), batch.runs[i].history, per_run);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::ofstream csv(dir / "batch_runs.csv", std::ios::binary);
    csv << "index,seed,status,iterations";
    for (const auto& v : cfg.problem.design_variables) csv << ",initial_" << v.name;
    csv << '\n';
    for (const auto& r : batch.runs) {
        csv << r.index << ',' << r.seed << ',' << to_string(r.history.status) << ',' << r.history.iterations();
        for (const auto& v : cfg.problem.design_variables) csv << ',' << shortest(r.initial.at(v.name));
        csv << '\n';
    }

    namespace pt = boost::property_tree;
    pt::ptree tree, summary, hist;
    summary.put("runs", batch.runs.size());
    summary.put("success", batch.count(RunStatus::success));
    summary.put("diverged", batch.count(RunStatus::diverged));
    summary.put("max_iter", batch.count(RunStatus::max_iter));
    summary.put("evaluator_error", batch.count(RunStatus::evaluator_error));
    summary.put("success_fraction", shortest(batch.success_fraction()));
    for (const auto& [iters, n] : batch.iteration_histogram()) hist.put(std::to_string(iters), n);
    tree.add_child("batch", summary);
    tree.add_child("iterations_to_success", hist);
    std::ofstream out(dir / "batch_summary.ini", std::ios::binary);
    pt::write_ini(out, tree);
}

std::optional<PowerLawFit> fit_power_law(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: x and y differ in length");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double det = n * sxx - sx * sx;
    if (!(std::abs(det) > 1e-12 * n * sxx)) return std::nullopt;
    PowerLawFit fit;
    fit.b = (n * sxy - sx * sy) / det;
    const double log_a = (sy - fit.b * sx) / n;
    fit.a = std::exp(log_a);
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = std::log(y[i]) - log_a - fit.b * std::log(x[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.points = n;
    return fit;
}

SweepResult sweep(const RunConfig& cfg, const Evaluator& evaluator, const std::string& variable,
                  const std::vector<double>& values) {
    const auto* dv = cfg.problem.find_variable(variable);
    if (!dv) throw ConfigError({"sweep: unknown design variable '" + variable + "'"});
    SweepResult result;
    result.variable = variable;
    const auto base = cfg.problem.initial_point();
    for (std::size_t i = 0; i < values.size(); ++i) {
        SweepPoint p;
        p.value = values[i];
        if (values[i] < dv->lower_bound || values[i] > dv->upper_bound) {
            p.note = "outside bounds [" + shortest(dv->lower_bound) + ", " + shortest(dv->upper_bound) + "]";
        } else {
            auto x = base;
            x.set(variable, values[i]);
            try {
                p.y = evaluator.evaluate(x, cfg.fidelity(), iteration_seed(cfg.seed, static_cast<int>(i)));
            } catch (const EvaluatorError& e) {
                p.note = e.what();
            }
        }
        result.points.push_back(std::move(p));
    }
    for (const auto& name : evaluator.parameter_names()) {
        std::vector<double> xs, ys;
        for (const auto& p : result.points) {
            if (!p.y || !p.y->contains(name)) continue;
            xs.push_back(p.value);
            ys.push_back(p.y->at(name));
        }
        result.fits[name] = fit_power_law(xs, ys);
    }
    return result;
}

void save_sweep(const std::filesystem::path& dir, const SweepResult& r) {
    std::filesystem::create_directories(dir);
    std::ofstream table(dir / ("sweep_" + r.variable + ".csv"), std::ios::binary);
    table << r.variable;
    for (const auto& [name, fit] : r.fits) table << ',' << name;
    table << ",note\n";
    for (const auto& p : r.points) {
        table << shortest(p.value);
        for (const auto& [name, fit] : r.fits)
            table << ',' << (p.y && p.y->contains(name) ? shortest(p.y->at(name)) : std::string());
        table << ',' << p.note << '\n';
    }
    std::ofstream fits(dir / ("sweep_" + r.variable + "_fit.csv"), std::ios::binary);
    fits << "parameter,a,b,residual,points\n";
    for (const auto& [name, fit] : r.fits) {
        if (fit)
            fits << name << ',' << shortest(fit->a) << ',' << shortest(fit->b) << ',' << shortest(fit->residual) << ','
                 << fit->points << '\n';
        else
            fits << name << ",,,,0\n";
    }
}

GridMinimum grid_minimum(const CostModel& model, std::span<const double> lower, std::span<const double> upper,
                         int points_per_axis, Execution execution) {
    const std::size_t dim = model.dimension();
    if (lower.size() != dim || upper.size() != dim || points_per_axis < 2)
        throw std::invalid_argument("grid_minimum: box does not match the cost dimension");
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points_per_axis);

    auto node = [&](std::size_t flat, std::vector<double>& x) {
        for (std::size_t d = 0; d < dim; ++d) {
            const auto idx = flat % static_cast<std::size_t>(points_per_axis);
            flat /= static_cast<std::size_t>(points_per_axis);
            x[d] = lower[d] + (upper[d] - lower[d]) * static_cast<double>(idx) / (points_per_axis - 1);
        }
    };
    auto cost_at = [&](const std::vector<double>& x) {
        try {
            return model.cost(x);
        } catch (const UpdateError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    double best_cost = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    const auto signed_total = static_cast<long long>(total);
    if (execution == Execution::parallel) {
#pragma omp parallel
        {
            std::vector<double> x(dim);
            double local_cost = std::numeric_limits<double>::infinity();
            std::size_t local_index = 0;
#pragma omp for schedule(static) nowait
            for (long long f = 0; f < signed_total; ++f) {
                node(static_cast<std::size_t>(f), x);
                const double c = cost_at(x);
                if (c < local_cost) {
                    local_cost = c;
                    local_index = static_cast<std::size_t>(f);
                }
            }
#pragma omp critical
            {
                if (local_cost < best_cost || (local_cost == best_cost && local_index < best_index)) {
                    best_cost = local_cost;
                    best_index = local_index;
                }
            }
        }
    } else {
        std::vector<double> x(dim);
        for (std::size_t f = 0; f < total; ++f) {
            node(f, x);
            const double c = cost_at(x);
            if (c < best_cost) {
                best_cost = c;
                best_index = f;
            }
        }
    }
    GridMinimum out;
    out.x.resize(dim);
    node(best_index, out.x);
    out.cost = best_cost;
    out.evaluations = total;
    return out;
}

GridMinimum joint_minimum(const CostModel& model, std::span<const double> lower, std::span<const double> upper,
                          int points_per_axis, const UpdateSettings& settings, Execution execution) {
    auto grid = grid_minimum(model, lower, upper, points_per_axis, execution);
    auto f = [&](std::span<const double> x) {
        try {
            return model.cost(x);
        } catch (const UpdateError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    MinimizerOptions opts{settings.cost_tolerance, settings.max_cost_evaluations};
    auto res = minimize_simplex(f, grid.x, lower, upper, opts);
    return {res.x, res.cost, grid.evaluations + static_cast<std::size_t>(res.evaluations)};
}

}  // namespace anmod
