#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lagsieve {

/// Nodes and weights of a fixed quadrature rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], computed by Newton iteration on
/// the Legendre three-term recurrence. Results are cached per n; the
/// returned reference stays valid for the lifetime of the program.
const QuadratureRule& gauss_legendre(std::size_t n);

/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a, double b);

/// n-point Gauss-Laguerre rule for the weight e^{-x} on [0, inf), exact
/// for polynomials of degree below 2n. Cached like gauss_legendre.
const QuadratureRule& gauss_laguerre(std::size_t n);

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    std::size_t evaluations = 0;
    bool converged = false;
};

struct AdaptiveOptions {
    double abs_tol = 1e-10;
    std::size_t initial_intervals = 64;
    std::size_t max_evaluations = 4'000'000;
};

/// Globally adaptive Simpson quadrature of f over [a, b].
///
/// The interval with the largest local error estimate is bisected until the
/// summed estimate drops below abs_tol or the evaluation budget is spent.
/// Never throws on non-convergence; callers inspect `converged`.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     const AdaptiveOptions& opts = {});

/// Same as integrate_adaptive but throws AccuracyError on non-convergence.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opts, const char* what);

}  // namespace lagsieve
