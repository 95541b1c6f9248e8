#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lagsieve/densities.hpp"
#include "lagsieve/laguerre.hpp"

namespace lagsieve {

/// Upper limit of numerical integration over [0, inf) for distances.
inline constexpr double kIntegrationCap = 200.0;

/// Squared Hellinger distance: integral (sqrt f - sqrt g)^2 = 2 - 2 integral sqrt(f g).
/// Adaptive Simpson on [0, 200] (absolute tolerance 1e-10) plus the
/// Cauchy-Schwarz tail bound sqrt((1-F(200))(1-G(200))). Result in [0, 2].
/// Throws AccuracyError when the quadrature does not converge.
double hellinger_sq(const GenericDensity& f, const GenericDensity& g);

/// rho_alpha(f, g) = (1/alpha) integral f ((f/g)^alpha - 1), alpha != 0,
/// alpha >= -1. Nonnegative for alpha >= -1 and equal to hellinger_sq at
/// alpha = -1/2. Integrable singularities at zeros of g are handled by the
/// adaptive refinement; non-integrable ones raise AccuracyError.
double rho_alpha(const GenericDensity& f, const GenericDensity& g, double alpha);

struct ApproximationOptions {
    std::size_t nodes = 256;   // Gauss-Legendre nodes on [0, Q]
    // Q is where the target's survival function drops to tail_mass^2; by
    // Cauchy-Schwarz each coefficient then loses at most tail_mass.
    double tail_mass = 1e-10;
    bool refine = false;       // direct Hellinger minimization over angles
};

/// Projection coefficients c_k = integral sqrt(e^x phi(x)) L_k(x) e^{-x} dx, k = 0..m.
std::vector<double> projection_coefficients(const GenericDensity& phi, int m, const ApproximationOptions& opts = {});

struct Approximation {
    LaguerreDensity projection;
    double hellinger_projection = 0.0;
    std::optional<LaguerreDensity> refined;
    std::optional<double> hellinger_refined;

    /// The refined density when refinement improved on the projection.
    const LaguerreDensity& best() const;
};

/// Best Laguerre approximation of degree m: theta = c / |c|. With
/// opts.refine, additionally minimizes the Hellinger distance over the
/// polar angles starting from the projection and reports both.
/// Throws DegenerateError when |c| < 1e-10.
Approximation best_approx_report(const GenericDensity& phi, int m, const ApproximationOptions& opts = {});

/// Convenience: best_approx_report(phi, m, opts).best().
LaguerreDensity best_approx(const GenericDensity& phi, int m, const ApproximationOptions& opts = {});

}  // namespace lagsieve
