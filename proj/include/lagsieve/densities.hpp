#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "lagsieve/laguerre.hpp"
#include "lagsieve/rng.hpp"

namespace lagsieve {

struct Exponential {
    double rate;
};

struct LogNormal {
    double meanlog;
    double sdlog;
};

struct Weibull {
    double shape;
    double scale;
};

/// User-supplied density on [0, inf). cdf is optional; when absent it is
/// obtained by adaptive quadrature of pdf.
struct CustomDensity {
    std::string label;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
};

/// A density on [0, inf): one of the parametric families used for the
/// simulation truths, a Laguerre density, or a custom callable.
class GenericDensity {
public:
    using Variant = std::variant<Exponential, LogNormal, Weibull, LaguerreDensity, CustomDensity>;

    GenericDensity(Exponential d);
    GenericDensity(LogNormal d);
    GenericDensity(Weibull d);
    GenericDensity(LaguerreDensity d);
    GenericDensity(CustomDensity d);

    /// Parses `name:p1,p2` with name in {exponential, lognormal, weibull,
    /// laguerre, laguerre-file}. laguerre takes the coefficient vector
    /// (normalized on parsing); laguerre-file takes a path to a JSON file
    /// {"m": int, "theta": [...]}.
    static GenericDensity parse(const std::string& descriptor);

    double pdf(double x) const;
    double cdf(double x) const;
    /// 1 - cdf(x) without cancellation for the built-in families.
    double survival(double x) const;
    double quantile(double p) const;

    /// Inverse-CDF draw from a single uniform.
    double sample(Rng& rng) const;

    /// Point beyond which the remaining mass is below `tail_mass`; tail
    /// masses far below machine epsilon are supported except for custom
    /// densities.
    double upper_support(double tail_mass) const;

    /// Canonical descriptor string; round-trips through parse except for
    /// custom densities.
    std::string descriptor() const;

    const Variant& value() const noexcept { return value_; }
    const LaguerreDensity* as_laguerre() const noexcept { return std::get_if<LaguerreDensity>(&value_); }

private:
    Variant value_;
};

}  // namespace lagsieve
