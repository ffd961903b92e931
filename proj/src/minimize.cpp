#include "anmod/minimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>

namespace anmod {

MinimizerResult minimize_scalar(const std::function<double(double)>& f, double start, double lower, double upper,
                                const MinimizerOptions& options) {
    int evaluations = 0;
    auto g = [&](double t) {
        ++evaluations;
        return f(std::clamp(t, lower, upper));
    };
    const int bits = std::numeric_limits<double>::digits / 2;

    double best_t = start;
    double best_f = g(start);
    auto consider = [&](double t, double ft) {
        if (ft < best_f) {
            best_f = ft;
            best_t = std::clamp(t, lower, upper);
        }
    };
    if (best_f < options.cost_tolerance) return {{best_t}, best_f, evaluations};

    double h = 1e-3 * (upper - lower);
    const double t_up = std::min(start + h, upper);
    const double t_down = std::max(start - h, lower);
    const double f_up = g(t_up);
    const double f_down = g(t_down);
    const double f0 = best_f;
    consider(t_up, f_up);
    consider(t_down, f_down);

    double lo = t_down;
    double hi = t_up;
    if (std::min(f_up, f_down) < f0) {
        // Walk downhill with doubling steps until the cost rises or a bound is hit.
        const double dir = f_up <= f_down ? 1.0 : -1.0;
        double a = start;
        double b = dir > 0 ? t_up : t_down;
        double fb = std::min(f_up, f_down);
        double c = b;
        while (evaluations < options.max_evaluations && b != lower && b != upper) {
            h *= 2.0;
            c = std::clamp(b + dir * h, lower, upper);
            const double fc = g(c);
            consider(c, fc);
            if (fc > fb) break;
            a = b;
            b = c;
            fb = fc;
        }
        lo = std::min(a, c);
        hi = std::max(a, c);
    }
    if (hi > lo) {
        auto budget = static_cast<std::uintmax_t>(std::max(1, options.max_evaluations - evaluations));
        const auto [t, ft] = boost::math::tools::brent_find_minima(g, lo, hi, bits, budget);
        consider(t, ft);
    }
    return {{best_t}, best_f, evaluations};
}

namespace {

struct SimplexContext {
    const std::function<double(std::span<const double>)>* f;
    std::span<const double> lower;
    std::span<const double> upper;
    std::vector<double> scratch;
    int evaluations = 0;

    void to_box(const gsl_vector* u, std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ui = std::clamp(gsl_vector_get(u, i), 0.0, 1.0);
            x[i] = lower[i] + ui * (upper[i] - lower[i]);
        }
    }
};

double simplex_objective(const gsl_vector* u, void* params) {
    auto* ctx = static_cast<SimplexContext*>(params);
    ctx->to_box(u, ctx->scratch);
    ++ctx->evaluations;
    const double v = (*ctx->f)(ctx->scratch);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

MinimizerResult minimize_simplex(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> start, std::span<const double> lower,
                                 std::span<const double> upper, const MinimizerOptions& options) {
    const std::size_t n = start.size();
    SimplexContext ctx{&f, lower, upper, std::vector<double>(n)};

    std::vector<double> best(start.begin(), start.end());
    double best_f = f(best);
    ++ctx.evaluations;
    if (best_f < options.cost_tolerance) return {best, best_f, ctx.evaluations};

    gsl_set_error_handler_off();
    std::unique_ptr<gsl_vector, VectorDeleter> u(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));

    gsl_multimin_function fn{&simplex_objective, n, &ctx};
    double initial_step = 0.05;
    for (int restart = 0; restart < 50 && ctx.evaluations < options.max_evaluations; ++restart) {
        for (std::size_t i = 0; i < n; ++i) {
            gsl_vector_set(u.get(), i, (best[i] - lower[i]) / (upper[i] - lower[i]));
            gsl_vector_set(step.get(), i, initial_step);
        }
        gsl_multimin_fminimizer_set(solver.get(), &fn, u.get(), step.get());
        while (ctx.evaluations < options.max_evaluations) {
            if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
            if (solver->fval < options.cost_tolerance) break;
            if (gsl_multimin_fminimizer_size(solver.get()) < 1e-14) break;
        }
        const double fval = solver->fval;
        const double improvement = best_f - fval;
        if (fval < best_f) {
            best_f = fval;
            ctx.to_box(solver->x, best);
        }
        if (best_f < options.cost_tolerance) break;
        if (improvement <= options.cost_tolerance) break;
        initial_step = std::max(initial_step * 0.5, 1e-6);
    }
    return {best, best_f, ctx.evaluations};
}

}  // namespace anmod
