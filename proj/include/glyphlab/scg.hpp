#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace glyphlab {

// Full-batch objective: fills grad (resized by caller contract to theta size)
// and returns the value.
using ValueGradFn =
    std::function<double(const std::vector<double>& theta, std::vector<double>& grad)>;

struct ScgOptions {
    std::size_t max_iters = 100;
    double grad_tol = 1e-8;     // terminate when ||grad||_2 <= grad_tol
    double sigma = 1e-5;        // finite-difference scale for curvature probes
    double lambda_init = 1e-6;  // initial Levenberg damping
};

struct MinimizeResult {
    std::vector<double> theta;
    // Objective at the start point followed by every accepted step, in order.
    // Non-increasing by construction: a step is only accepted when it does
    // not increase the objective.
    std::vector<double> accepted_values;
    std::size_t iterations = 0;
    std::string termination;  // "grad_tol" | "max_iters" | "stationary" | "stalled"
    // Optional per-accepted-step hook, called after each accepted step with
    // (step index starting at 1, objective value).
    std::function<void(std::size_t, double)> on_accept;
};

// Scaled conjugate gradient after Moller (Neural Networks 6(4), 1993).
// Hessian-free: curvature along the search direction is estimated from a
// gradient difference, with Levenberg-style damping to keep steps trust-
// worthy. No learning rate. Throws NumericalError if the objective goes
// non-finite, reporting the iteration.
MinimizeResult scg_minimize(const ValueGradFn& objective, std::vector<double> theta0,
                            const ScgOptions& opts,
                            const std::function<void(std::size_t, double)>& on_accept = {});

struct GdOptions {
    std::size_t max_iters = 100;
    double learning_rate = 0.1;
    double grad_tol = 1e-8;
};

// Plain full-batch gradient descent fallback; consumes a learning rate.
MinimizeResult gd_minimize(const ValueGradFn& objective, std::vector<double> theta0,
                           const GdOptions& opts,
                           const std::function<void(std::size_t, double)>& on_accept = {});

}  // namespace glyphlab
