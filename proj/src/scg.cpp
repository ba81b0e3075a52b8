#include "glyphlab/scg.hpp"

#include <cmath>
#include <string>

#include "glyphlab/error.hpp"

namespace glyphlab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_finite(double value, std::size_t iter) {
    if (!std::isfinite(value))
        throw NumericalError("scg: non-finite objective at iteration " + std::to_string(iter));
}

}  // namespace

MinimizeResult scg_minimize(const ValueGradFn& objective, std::vector<double> theta0,
                            const ScgOptions& opts,
                            const std::function<void(std::size_t, double)>& on_accept) {
    const std::size_t n = theta0.size();
    MinimizeResult res;
    res.theta = std::move(theta0);

    std::vector<double> grad(n, 0.0), trial(n), trial_grad(n, 0.0), probe_grad(n, 0.0);
    double f = objective(res.theta, grad);
    check_finite(f, 0);
    res.accepted_values.push_back(f);

    std::vector<double> r(n);  // residual = -grad
    for (std::size_t i = 0; i < n; ++i) r[i] = -grad[i];
    std::vector<double> p = r;

    double r_norm2 = dot(r, r);
    const double tol2 = opts.grad_tol * opts.grad_tol;
    if (r_norm2 <= tol2) {
        res.termination = "grad_tol";
        return res;
    }

    double lambda = opts.lambda_init;
    double lambda_bar = 0.0;
    bool success = true;
    double delta = 0.0;    // curvature p'Hp from the latest probe
    double p_norm2 = 0.0;
    std::size_t k = 0;

    while (k < opts.max_iters) {
        ++k;

        if (success) {
            p_norm2 = dot(p, p);
            if (p_norm2 == 0.0) {
                res.termination = "stationary";
                break;
            }
            // Curvature estimate along p from a gradient difference.
            const double sigma_k = opts.sigma / std::sqrt(p_norm2);
            for (std::size_t i = 0; i < n; ++i) trial[i] = res.theta[i] + sigma_k * p[i];
            const double f_probe = objective(trial, probe_grad);
            check_finite(f_probe, k);
            delta = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                delta += p[i] * (probe_grad[i] - grad[i]) / sigma_k;
        }

        // Damp, and force positive definiteness along p when needed.
        double delta_k = delta + (lambda - lambda_bar) * p_norm2;
        if (delta_k <= 0.0) {
            lambda_bar = 2.0 * (lambda - delta_k / p_norm2);
            delta_k = -delta_k + lambda * p_norm2;
            lambda = lambda_bar;
        }

        double mu = dot(p, r);
        if (mu <= 0.0) {
            // Not a descent direction; restart on steepest descent.
            p = r;
            success = true;
            continue;
        }

        const double alpha = mu / delta_k;
        for (std::size_t i = 0; i < n; ++i) trial[i] = res.theta[i] + alpha * p[i];
        const double f_trial = objective(trial, trial_grad);
        check_finite(f_trial, k);

        const double comparison = 2.0 * delta_k * (f - f_trial) / (mu * mu);

        if (comparison >= 0.0) {
            // Accepted: the objective did not increase.
            res.theta.swap(trial);
            f = f_trial;
            grad.swap(trial_grad);

            const double r_dot_old = dot(r, grad);  // r_old . grad_new
            for (std::size_t i = 0; i < n; ++i) r[i] = -grad[i];
            r_norm2 = dot(r, r);

            res.accepted_values.push_back(f);
            if (on_accept) on_accept(res.accepted_values.size() - 1, f);

            lambda_bar = 0.0;
            success = true;

            if (r_norm2 <= tol2) {
                res.termination = "grad_tol";
                break;
            }

            if (k % n == 0) {
                p = r;  // periodic restart
            } else {
                // Polak-Ribiere-style conjugacy: beta = (|r_new|^2 - r_new.r_old)/mu.
                const double beta = (r_norm2 + r_dot_old) / mu;  // r_new.r_old = -r_old.grad_new
                for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            }
            if (comparison >= 0.75) lambda *= 0.25;
        } else {
            lambda_bar = lambda;
            success = false;
        }

        if (comparison < 0.25) lambda += delta_k * (1.0 - comparison) / p_norm2;
        if (lambda > 1e250) {
            res.termination = "stalled";
            break;
        }
    }

    res.iterations = k;
    if (res.termination.empty()) res.termination = "max_iters";
    return res;
}

MinimizeResult gd_minimize(const ValueGradFn& objective, std::vector<double> theta0,
                           const GdOptions& opts,
                           const std::function<void(std::size_t, double)>& on_accept) {
    const std::size_t n = theta0.size();
    MinimizeResult res;
    res.theta = std::move(theta0);

    std::vector<double> grad(n, 0.0);
    double f = objective(res.theta, grad);
    check_finite(f, 0);
    res.accepted_values.push_back(f);

    const double tol2 = opts.grad_tol * opts.grad_tol;
    std::size_t k = 0;
    while (k < opts.max_iters) {
        ++k;
        if (dot(grad, grad) <= tol2) {
            res.termination = "grad_tol";
            break;
        }
        for (std::size_t i = 0; i < n; ++i) res.theta[i] -= opts.learning_rate * grad[i];
        f = objective(res.theta, grad);
        check_finite(f, k);
        res.accepted_values.push_back(f);
        if (on_accept) on_accept(k, f);
    }
    res.iterations = k;
    if (res.termination.empty()) res.termination = "max_iters";
    return res;
}

}  // namespace glyphlab
