#include "lagsieve/distances.hpp"

#include <algorithm>
#include <cmath>

#include "lagsieve/errors.hpp"
#include "lagsieve/nelder_mead.hpp"
#include "lagsieve/quadrature.hpp"

namespace lagsieve {

namespace {

AdaptiveOptions distance_quadrature() {
    AdaptiveOptions opts;
    opts.abs_tol = 1e-10;
    opts.initial_intervals = 400;
    return opts;
}

double tail_bound(const GenericDensity& f, const GenericDensity& g) {
    const double tf = std::max(0.0, f.survival(kIntegrationCap));
    const double tg = std::max(0.0, g.survival(kIntegrationCap));
    return std::sqrt(tf * tg);
}

}  // namespace

double hellinger_sq(const GenericDensity& f, const GenericDensity& g) {
    const auto integrand = [&](double x) {
        const double prod = f.pdf(x) * g.pdf(x);
        return prod > 0.0 ? std::sqrt(prod) : 0.0;
    };
    const AdaptiveOptions opts = distance_quadrature();
    const IntegrationResult r = integrate_adaptive(integrand, 0.0, kIntegrationCap, opts);
    const double tail = tail_bound(f, g);
    if (!r.converged || tail > 1e-9) {
        throw AccuracyError("hellinger_sq: quadrature did not converge", 2.0 - 2.0 * r.value, 2.0 * (r.error + tail));
    }
    return std::clamp(2.0 - 2.0 * r.value, 0.0, 2.0);
}

double rho_alpha(const GenericDensity& f, const GenericDensity& g, double alpha) {
    if (alpha == 0.0 || !(alpha >= -1.0)) throw ValidationError("rho_alpha: alpha must be >= -1 and nonzero");
    const auto point = [&](double x) {
        const double fx = f.pdf(x);
        if (!(fx > 0.0)) return 0.0;
        const double gx = g.pdf(x);
        if (!(gx > 0.0)) {
            if (alpha > 0.0) return std::numeric_limits<double>::infinity();
            return -fx / alpha;
        }
        const double ratio_term = std::exp((1.0 + alpha) * std::log(fx) - alpha * std::log(gx));
        return (ratio_term - fx) / alpha;
    };
    // An isolated zero of g can land exactly on a panel node; the integrand
    // is then sampled next to it instead.
    const auto integrand = [&](double x) {
        double v = point(x);
        if (!std::isfinite(v)) v = point(x + 1e-9 * (1.0 + x));
        return v;
    };
    const IntegrationResult r = integrate_adaptive(integrand, 0.0, kIntegrationCap, distance_quadrature());
    if (!r.converged) throw AccuracyError("rho_alpha: quadrature did not converge", r.value, r.error);
    return r.value;
}

std::vector<double> projection_coefficients(const GenericDensity& phi, int m, const ApproximationOptions& opts) {
    if (m < 0 || m > kMaxLaguerreDegree) throw UnsupportedDegreeError("best_approx: unsupported degree");
    const double upper = phi.upper_support(opts.tail_mass * opts.tail_mass);
    const QuadratureRule rule = gauss_legendre(opts.nodes, 0.0, upper);
    std::vector<double> c(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> basis(c.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double x = rule.nodes[i];
        const double d = phi.pdf(x);
        if (!(d > 0.0)) continue;
        // sqrt(e^x phi) e^{-x} = sqrt(phi) e^{-x/2}
        const double w = rule.weights[i] * std::sqrt(d) * std::exp(-0.5 * x);
        laguerre_all(x, basis);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += w * basis[k];
    }
    return c;
}

const LaguerreDensity& Approximation::best() const {
    if (refined && hellinger_refined && *hellinger_refined < hellinger_projection) return *refined;
    return projection;
}

Approximation best_approx_report(const GenericDensity& phi, int m, const ApproximationOptions& opts) {
    std::vector<double> c = projection_coefficients(phi, m, opts);
    double nrm = 0.0;
    for (double v : c) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm >= 1e-10)) throw DegenerateError("best_approx: projection coefficients vanish");
    for (double& v : c) v /= nrm;

    Approximation out{LaguerreDensity(c), 0.0, std::nullopt, std::nullopt};
    out.hellinger_projection = hellinger_sq(phi, out.projection);
    if (!opts.refine || m == 0) return out;

    // Affinity integral sqrt(phi) e^{-x/2} |p_theta(x)| on the projection rule.
    const double upper = phi.upper_support(opts.tail_mass * opts.tail_mass);
    const QuadratureRule rule = gauss_legendre(opts.nodes, 0.0, upper);
    const std::size_t terms = static_cast<std::size_t>(m) + 1;
    std::vector<double> weight(rule.size());
    std::vector<double> basis(rule.size() * terms);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double x = rule.nodes[i];
        const double d = phi.pdf(x);
        weight[i] = d > 0.0 ? rule.weights[i] * std::sqrt(d) * std::exp(-0.5 * x) : 0.0;
        laguerre_all(x, std::span<double>(basis.data() + i * terms, terms));
    }
    const auto objective = [&](std::span<const double> angles) {
        std::vector<double> folded(angles.begin(), angles.end());
        for (double& a : folded) a = fold_angle(a);
        const std::vector<double> theta = angles_to_theta(folded);
        double affinity = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            double p = 0.0;
            for (std::size_t k = 0; k < terms; ++k) p += theta[k] * basis[i * terms + k];
            affinity += weight[i] * std::abs(p);
        }
        return 2.0 - 2.0 * affinity;
    };
    NelderMeadOptions nm;
    nm.initial_step = 0.1;
    nm.f_tol = 1e-12;
    nm.x_tol = 1e-8;
    nm.max_iterations = 5000;
    const NelderMeadResult res = nelder_mead(objective, theta_to_angles(c), nm);
    std::vector<double> folded = res.x;
    for (double& a : folded) a = fold_angle(a);
    out.refined = LaguerreDensity::from_angles(folded);
    out.hellinger_refined = hellinger_sq(phi, *out.refined);
    return out;
}

LaguerreDensity best_approx(const GenericDensity& phi, int m, const ApproximationOptions& opts) {
    return best_approx_report(phi, m, opts).best();
}

}  // namespace lagsieve
