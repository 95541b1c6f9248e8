#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lagsieve {

struct NelderMeadOptions {
    std::size_t max_iterations = 2000;
    // Converged when the spread of simplex values is below
    // f_tol * (1 + |f_best|) and every vertex is within x_tol of the best
    // one in the max norm.
    double f_tol = 1e-8;
    double x_tol = 1e-6;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Minimizes f with the standard Nelder-Mead simplex (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2), starting from an
/// axis-aligned simplex around x0. Deterministic.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace lagsieve
