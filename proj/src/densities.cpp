#include "lagsieve/densities.hpp"

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <cmath>
#include <sstream>

#include "lagsieve/errors.hpp"
#include "lagsieve/io.hpp"
#include "lagsieve/quadrature.hpp"

namespace lagsieve {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive and finite");
}

double custom_cdf(const CustomDensity& d, double x) {
    if (!(x > 0.0)) return 0.0;
    if (d.cdf) return d.cdf(x);
    AdaptiveOptions opts;
    opts.abs_tol = 1e-11;
    return integrate_or_throw(d.pdf, 0.0, std::min(x, 1e4), opts, "custom density cdf");
}

double bisect_quantile(const std::function<double(double)>& cdf, double p) {
    double lo = 0.0;
    double hi = 1.0;
    while (cdf(hi) < p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("quantile: failed to bracket");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        (cdf(mid) >= p ? hi : lo) = mid;
    }
    return hi;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

GenericDensity::GenericDensity(Exponential d) : value_(d) { require_positive(d.rate, "exponential rate"); }

GenericDensity::GenericDensity(LogNormal d) : value_(d) {
    if (!std::isfinite(d.meanlog)) throw ValidationError("lognormal meanlog must be finite");
    require_positive(d.sdlog, "lognormal sdlog");
}

GenericDensity::GenericDensity(Weibull d) : value_(d) {
    require_positive(d.shape, "weibull shape");
    require_positive(d.scale, "weibull scale");
}

GenericDensity::GenericDensity(LaguerreDensity d) : value_(std::move(d)) {}

GenericDensity::GenericDensity(CustomDensity d) : value_(std::move(d)) {
    if (!std::get<CustomDensity>(value_).pdf) throw ValidationError("custom density needs a pdf");
}

GenericDensity GenericDensity::parse(const std::string& descriptor) {
    const auto colon = descriptor.find(':');
    if (colon == std::string::npos) {
        throw ValidationError("density descriptor '" + descriptor + "' must look like name:p1,p2");
    }
    const std::string name = descriptor.substr(0, colon);
    const std::string rest = descriptor.substr(colon + 1);
    if (name == "laguerre-file") return GenericDensity(read_laguerre_json(rest));

    std::vector<double> params;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            params.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("density descriptor '" + descriptor + "': bad parameter '" + item + "'");
        }
    }
    auto expect = [&](std::size_t n) {
        if (params.size() != n) {
            throw ValidationError("density '" + name + "' takes " + std::to_string(n) + " parameter(s), got " +
                                  std::to_string(params.size()));
        }
    };
    if (name == "exponential") {
        expect(1);
        return GenericDensity(Exponential{params[0]});
    }
    if (name == "lognormal") {
        expect(2);
        return GenericDensity(LogNormal{params[0], params[1]});
    }
    if (name == "weibull") {
        expect(2);
        return GenericDensity(Weibull{params[0], params[1]});
    }
    if (name == "laguerre") {
        if (params.empty()) throw ValidationError("density 'laguerre' needs at least one coefficient");
        return GenericDensity(LaguerreDensity::from_coefficients(params));
    }
    throw ValidationError("unknown density family '" + name +
                          "' (expected exponential, lognormal, weibull, laguerre or laguerre-file)");
}

double GenericDensity::pdf(double x) const {
    if (!(x >= 0.0)) return 0.0;
    return std::visit(
        overloaded{
            [x](const Exponential& d) { return boost::math::pdf(boost::math::exponential_distribution<>(d.rate), x); },
            [x](const LogNormal& d) {
                if (x == 0.0) return 0.0;
                return boost::math::pdf(boost::math::lognormal_distribution<>(d.meanlog, d.sdlog), x);
            },
            [x](const Weibull& d) {
                if (x == 0.0 && d.shape < 1.0) return std::numeric_limits<double>::infinity();
                return boost::math::pdf(boost::math::weibull_distribution<>(d.shape, d.scale), x);
            },
            [x](const LaguerreDensity& d) { return d.pdf(x); },
            [x](const CustomDensity& d) { return d.pdf(x); },
        },
        value_);
}

double GenericDensity::cdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    return std::visit(
        overloaded{
            [x](const Exponential& d) { return boost::math::cdf(boost::math::exponential_distribution<>(d.rate), x); },
            [x](const LogNormal& d) {
                return boost::math::cdf(boost::math::lognormal_distribution<>(d.meanlog, d.sdlog), x);
            },
            [x](const Weibull& d) { return boost::math::cdf(boost::math::weibull_distribution<>(d.shape, d.scale), x); },
            [x](const LaguerreDensity& d) { return d.cdf(x); },
            [x](const CustomDensity& d) { return custom_cdf(d, x); },
        },
        value_);
}

double GenericDensity::survival(double x) const {
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    namespace bm = boost::math;
    return std::visit(
        overloaded{
            [x](const Exponential& d) { return bm::cdf(bm::complement(bm::exponential_distribution<>(d.rate), x)); },
            [x](const LogNormal& d) {
                return bm::cdf(bm::complement(bm::lognormal_distribution<>(d.meanlog, d.sdlog), x));
            },
            [x](const Weibull& d) { return bm::cdf(bm::complement(bm::weibull_distribution<>(d.shape, d.scale), x)); },
            [x](const LaguerreDensity& d) { return d.survival(x); },
            [x](const CustomDensity& d) { return 1.0 - custom_cdf(d, x); },
        },
        value_);
}

double GenericDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile: probability must lie in (0, 1)");
    return std::visit(
        overloaded{
            [p](const Exponential& d) {
                return boost::math::quantile(boost::math::exponential_distribution<>(d.rate), p);
            },
            [p](const LogNormal& d) {
                return boost::math::quantile(boost::math::lognormal_distribution<>(d.meanlog, d.sdlog), p);
            },
            [p](const Weibull& d) {
                return boost::math::quantile(boost::math::weibull_distribution<>(d.shape, d.scale), p);
            },
            [p](const LaguerreDensity& d) { return d.quantile(p); },
            [p](const CustomDensity& d) {
                return bisect_quantile([&d](double x) { return custom_cdf(d, x); }, p);
            },
        },
        value_);
}

double GenericDensity::sample(Rng& rng) const { return quantile(rng.uniform()); }

double GenericDensity::upper_support(double tail_mass) const {
    if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw ValidationError("upper_support: tail mass must lie in (0, 1)");
    namespace bm = boost::math;
    return std::visit(
        overloaded{
            [=](const Exponential& d) {
                return bm::quantile(bm::complement(bm::exponential_distribution<>(d.rate), tail_mass));
            },
            [=](const LogNormal& d) {
                return bm::quantile(bm::complement(bm::lognormal_distribution<>(d.meanlog, d.sdlog), tail_mass));
            },
            [=](const Weibull& d) {
                return bm::quantile(bm::complement(bm::weibull_distribution<>(d.shape, d.scale), tail_mass));
            },
            [=](const LaguerreDensity& d) { return d.upper_quantile(tail_mass); },
            [=](const CustomDensity& d) {
                try {
                    return bisect_quantile([&d](double x) { return custom_cdf(d, x); },
                                           std::min(1.0 - tail_mass, 1.0 - 1e-15));
                } catch (const NumericalError&) {
                    return 200.0;
                }
            },
        },
        value_);
}

std::string GenericDensity::descriptor() const {
    return std::visit(
        overloaded{
            [](const Exponential& d) { return "exponential:" + format_double(d.rate); },
            [](const LogNormal& d) { return "lognormal:" + format_double(d.meanlog) + "," + format_double(d.sdlog); },
            [](const Weibull& d) { return "weibull:" + format_double(d.shape) + "," + format_double(d.scale); },
            [](const LaguerreDensity& d) {
                std::string s = "laguerre:";
                for (std::size_t i = 0; i < d.theta().size(); ++i) {
                    if (i) s += ",";
                    s += format_double(d.theta()[i]);
                }
                return s;
            },
            [](const CustomDensity& d) { return "custom:" + d.label; },
        },
        value_);
}

}  // namespace lagsieve
