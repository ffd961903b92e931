#pragma once

// Bounded derivative-free local minimizers used for the per-block solve.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace anmod {

struct MinimizerOptions {
    double cost_tolerance = 1e-20;
    int max_evaluations = 20000;
};

struct MinimizerResult {
    std::vector<double> x;
    double cost = 0.0;
    int evaluations = 0;
};

/// Scalar minimization on [lower, upper] seeded at `start`: geometric
/// bracketing downhill from the start, then Brent. Never returns a point
/// worse than `start`.
MinimizerResult minimize_scalar(const std::function<double(double)>& f, double start, double lower, double upper,
                                const MinimizerOptions& options);

/// Nelder-Mead on the box, working in unit-scaled coordinates with the
/// objective evaluated at the projection onto the box. Restarts from the
/// best vertex until a restart no longer improves. Never returns a point
/// worse than `start`.
MinimizerResult minimize_simplex(const std::function<double(std::span<const double>)>& f,
                                 std::span<const double> start, std::span<const double> lower,
                                 std::span<const double> upper, const MinimizerOptions& options);

}  // namespace anmod
