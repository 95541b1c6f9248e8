#include "lagsieve/laguerre.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lagsieve/errors.hpp"
#include "lagsieve/quadrature.hpp"

namespace lagsieve {

namespace {

void check_degree(int k) {
    if (k < 0 || k > kMaxLaguerreDegree) {
        throw UnsupportedDegreeError("Laguerre degree " + std::to_string(k) + " outside [0, " +
                                     std::to_string(kMaxLaguerreDegree) + "]");
    }
}

double norm2(std::span<const double> v) {
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x / scale) * (x / scale);
    return scale * std::sqrt(s);
}

}  // namespace

double laguerre_eval(int k, double x) {
    check_degree(k);
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = 1.0 - x;
    for (int j = 1; j < k; ++j) {
        const double next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

void laguerre_all(double x, std::span<double> out) {
    if (out.empty()) return;
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = 1.0 - x;
    for (std::size_t j = 1; j + 1 < out.size(); ++j) {
        const double jd = static_cast<double>(j);
        out[j + 1] = ((2.0 * jd + 1.0 - x) * out[j] - jd * out[j - 1]) / (jd + 1.0);
    }
}

double fold_angle(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x, two_pi);
    if (y < 0.0) y += two_pi;
    return y > std::numbers::pi ? two_pi - y : y;
}

std::vector<double> canonical_sign(std::vector<double> theta) {
    for (double v : theta) {
        if (v != 0.0) {
            if (v < 0.0) {
                for (double& w : theta) w = -w;
            }
            break;
        }
    }
    return theta;
}

std::vector<double> angles_to_theta(std::span<const double> angles) {
    const std::size_t m = angles.size();
    check_degree(static_cast<int>(m));
    std::vector<double> theta(m + 1);
    double sin_prod = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        theta[i] = sin_prod * std::cos(angles[i]);
        sin_prod *= std::sin(angles[i]);
    }
    theta[m] = sin_prod;
    return canonical_sign(std::move(theta));
}

std::vector<double> theta_to_angles(std::span<const double> theta) {
    if (theta.empty()) throw ValidationError("theta_to_angles: empty coefficient vector");
    const double nrm = norm2(theta);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw ValidationError("theta_to_angles: zero or non-finite coefficient vector");
    }
    const std::size_t m = theta.size() - 1;
    std::vector<double> t(theta.begin(), theta.end());
    const double sign = (t[m] < 0.0) ? -1.0 : 1.0;
    for (double& v : t) v = sign * v / nrm;
    std::vector<double> angles(m);
    // Suffix norms |t_{i+1..m}|.
    std::vector<double> tail(m + 1, 0.0);
    double acc = 0.0;
    for (std::size_t i = m + 1; i-- > 0;) {
        tail[i] = std::sqrt(acc);
        acc += t[i] * t[i];
    }
    for (std::size_t i = 0; i < m; ++i) angles[i] = std::atan2(tail[i], t[i]);
    return angles;
}

LaguerreDensity::LaguerreDensity() : theta_{1.0}, rule_(&gauss_laguerre(2)) {}

LaguerreDensity::LaguerreDensity(std::vector<double> theta) : theta_(std::move(theta)), rule_(nullptr) {
    if (theta_.empty()) throw ValidationError("LaguerreDensity: empty theta");
    check_degree(degree());
    const double nrm = norm2(theta_);
    if (!std::isfinite(nrm) || std::abs(nrm - 1.0) > 1e-9) {
        throw ValidationError("LaguerreDensity: theta must have unit norm (got " +
                              std::to_string(nrm) + ")");
    }
    for (double& v : theta_) v /= nrm;
    rule_ = &gauss_laguerre(theta_.size() + 1);
}

LaguerreDensity LaguerreDensity::from_coefficients(std::vector<double> coefficients) {
    const double nrm = norm2(coefficients);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw DegenerateError("LaguerreDensity: cannot normalize a zero coefficient vector");
    }
    for (double& v : coefficients) v /= nrm;
    return LaguerreDensity(std::move(coefficients));
}

LaguerreDensity LaguerreDensity::from_angles(std::span<const double> angles) {
    return LaguerreDensity(angles_to_theta(angles));
}

double LaguerreDensity::poly(double x) const {
    const std::size_t n = theta_.size();
    double prev = 1.0;
    double sum = theta_[0];
    if (n == 1) return sum;
    double cur = 1.0 - x;
    sum += theta_[1] * cur;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double jd = static_cast<double>(j);
        const double next = ((2.0 * jd + 1.0 - x) * cur - jd * prev) / (jd + 1.0);
        prev = cur;
        cur = next;
        sum += theta_[j + 1] * cur;
    }
    return sum;
}

double LaguerreDensity::pdf(double x) const {
    if (!(x >= 0.0)) return 0.0;
    const double p = poly(x);
    if (x < 600.0) return std::exp(-x) * p * p;
    if (p == 0.0) return 0.0;
    return std::exp(-x + 2.0 * std::log(std::abs(p)));
}

double LaguerreDensity::survival(double x) const {
    if (!(x > 0.0)) return 1.0;
    if (x > 745.0) return 0.0;
    const QuadratureRule& rule = *rule_;
    double tail = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double p = poly(x + rule.nodes[i]);
        tail += rule.weights[i] * p * p;
    }
    return std::clamp(std::exp(-x) * tail, 0.0, 1.0);
}

double LaguerreDensity::cdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    return 1.0 - survival(x);
}

namespace {

// Bracket by doubling, then bisect on `below(x)`, which must be monotone
// (false up to the answer, true after it).
template <class Pred>
double bisect_increasing(Pred below) {
    double lo = 0.0;
    double hi = 1.0;
    while (!below(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("quantile: failed to bracket");
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        (below(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

double LaguerreDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile: probability must lie in (0, 1)");
    return bisect_increasing([&](double x) { return cdf(x) >= p; });
}

double LaguerreDensity::upper_quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("upper_quantile: tail probability must lie in (0, 1)");
    return bisect_increasing([&](double x) { return survival(x) <= q; });
}

double LaguerreDensity::exp_tilted_integral(double r) const {
    if (!(r > -1.0)) {
        throw DivergentIntegralError("exp_tilted_integral: requires r > -1 (got " + std::to_string(r) + ")");
    }
    const QuadratureRule& rule = *rule_;
    const double scale = 1.0 / (1.0 + r);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double p = poly(rule.nodes[i] * scale);
        sum += rule.weights[i] * p * p;
    }
    return scale * sum;
}

}  // namespace lagsieve
