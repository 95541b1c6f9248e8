#include "lagsieve/features.hpp"

#include <algorithm>
#include <cmath>

#include "lagsieve/distances.hpp"
#include "lagsieve/errors.hpp"
#include "lagsieve/quadrature.hpp"

namespace lagsieve {

double reproduction_number(const LaguerreDensity& phi_g, double growth_rate) {
    return 1.0 / phi_g.exp_tilted_integral(growth_rate);
}

double reproduction_number(const GenericDensity& phi_g, double growth_rate) {
    if (!(growth_rate > -1.0)) throw DivergentIntegralError("reproduction_number: growth rate must exceed -1");
    AdaptiveOptions opts;
    opts.abs_tol = 1e-12;
    opts.initial_intervals = 400;
    const double upper = phi_g.upper_support(1e-13);
    const double tilted = integrate_or_throw([&](double t) { return std::exp(-growth_rate * t) * phi_g.pdf(t); },
                                             0.0, upper, opts, "reproduction_number");
    if (!(tilted > 0.0)) throw DegenerateError("reproduction_number: tilted integral vanishes");
    return 1.0 / tilted;
}

double presymptomatic_prob(const LaguerreDensity& phi_i, const LaguerreDensity& phi_g) {
    AdaptiveOptions opts;
    opts.abs_tol = 1e-10;
    opts.initial_intervals = 400;
    const double value = integrate_or_throw([&](double x) { return phi_g.cdf(x) * phi_i.pdf(x); }, 0.0,
                                            kIntegrationCap, opts, "presymptomatic_prob");
    return std::clamp(value, 0.0, 1.0);
}

FeatureReport feature_report(const FitResult& fit, double growth_rate, std::span<const double> probs) {
    for (double p : probs) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("feature_report: probabilities must lie in (0, 1)");
    }
    FeatureReport report;
    report.growth_rate_used = growth_rate;
    report.r0 = reproduction_number(fit.phi_g_hat, growth_rate);
    for (double p : probs) {
        report.quantiles_i[p] = fit.phi_i_hat.quantile(p);
        report.quantiles_g[p] = fit.phi_g_hat.quantile(p);
    }
    report.presymptomatic_prob = presymptomatic_prob(fit.phi_i_hat, fit.phi_g_hat);
    return report;
}

}  // namespace lagsieve
