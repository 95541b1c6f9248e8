#pragma once

#include <map>
#include <span>
#include <vector>

#include "lagsieve/densities.hpp"
#include "lagsieve/estimator.hpp"
#include "lagsieve/laguerre.hpp"

namespace lagsieve {

struct FeatureReport {
    double r0 = 1.0;
    double growth_rate_used = 0.0;  // per day
    std::map<double, double> quantiles_i;
    std::map<double, double> quantiles_g;
    double presymptomatic_prob = 0.5;
};

/// Euler-Lotka plug-in: 1 / integral e^{-r t} phi_G(t) dt. Requires r > -1;
/// DivergentIntegralError otherwise.
double reproduction_number(const LaguerreDensity& phi_g, double growth_rate);

/// Same quantity for an arbitrary density, by adaptive quadrature over
/// [0, Q] with Q its (1 - 1e-13)-quantile.
double reproduction_number(const GenericDensity& phi_g, double growth_rate);

/// P(G <= I) for independent I ~ phi_i and G ~ phi_g, computed as
/// integral F_G(x) phi_I(x) dx.
double presymptomatic_prob(const LaguerreDensity& phi_i, const LaguerreDensity& phi_g);

inline const std::vector<double> kDefaultFeatureProbs{0.3, 0.5, 0.7, 0.9};

/// Every probability must lie in (0, 1); ValidationError otherwise.
FeatureReport feature_report(const FitResult& fit, double growth_rate,
                             std::span<const double> probs = kDefaultFeatureProbs);

}  // namespace lagsieve
