#include "lagsieve/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <algorithm>
#include <limits>

#include "lagsieve/errors.hpp"

namespace lagsieve {

namespace {

QuadratureRule compute_gauss_legendre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = ((2.0 * jd + 1.0) * z * p2 - jd * p3) / (jd + 1.0);
            }
            pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double z_prev = z;
            z = z_prev - p1 / pp;
            if (std::abs(z - z_prev) <= 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t n) {
    if (n == 0) throw ValidationError("gauss_legendre: need at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(n));
    return *slot;
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    const QuadratureRule& ref = gauss_legendre(n);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * ref.nodes[i];
        rule.weights[i] = half * ref.weights[i];
    }
    return rule;
}

// Newton iteration with the classical asymptotic initial guesses.
namespace {

QuadratureRule compute_gauss_laguerre(std::size_t n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double nd = static_cast<double>(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            z = 3.0 / (1.0 + 2.4 * nd);
        } else if (i == 1) {
            z += 15.0 / (1.0 + 2.5 * nd);
        } else {
            const double ai = static_cast<double>(i - 1);
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - rule.nodes[i - 2]);
        }
        double p2 = 0.0;
        double pp = 0.0;
        bool converged = false;
        for (int iter = 0; iter < 200; ++iter) {
            double p1 = 1.0;
            p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = ((2.0 * jd + 1.0 - z) * p2 - jd * p3) / (jd + 1.0);
            }
            pp = (nd * p1 - nd * p2) / z;
            const double z_prev = z;
            z = z_prev - p1 / pp;
            if (std::abs(z - z_prev) <= 1e-14 * std::max(1.0, std::abs(z))) {
                converged = true;
                break;
            }
        }
        if (!converged) throw NumericalError("gauss_laguerre: Newton iteration failed");
        rule.nodes[i] = z;
        rule.weights[i] = -1.0 / (pp * nd * p2);
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_laguerre(std::size_t n) {
    if (n == 0) throw ValidationError("gauss_laguerre: need at least one node");
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_laguerre(n));
    return *slot;
}

namespace {

struct Panel {
    double a, b;
    double fa, fq1, fm, fq3, fb;
    double value;
    double error;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel make_panel(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                 double fb, std::size_t& evals) {
    Panel p{a, b, fa, 0.0, fm, 0.0, fb, 0.0, 0.0};
    const double h = b - a;
    p.fq1 = f(a + 0.25 * h);
    p.fq3 = f(a + 0.75 * h);
    evals += 2;
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    const double left = h / 12.0 * (fa + 4.0 * p.fq1 + fm);
    const double right = h / 12.0 * (fm + 4.0 * p.fq3 + fb);
    const double diff = left + right - whole;
    p.value = left + right + diff / 15.0;
    p.error = std::abs(diff) / 15.0;
    if (!std::isfinite(p.value)) p.error = std::numeric_limits<double>::infinity();
    return p;
}

}  // namespace

IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     const AdaptiveOptions& opts) {
    IntegrationResult result;
    if (!(b > a)) {
        result.converged = true;
        return result;
    }
    std::vector<Panel> panels;
    std::size_t evals = 0;
    const std::size_t n0 = std::max<std::size_t>(1, opts.initial_intervals);
    const double width = (b - a) / static_cast<double>(n0);
    double f_left = f(a);
    ++evals;
    double total_error = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == n0) ? b : a + width * static_cast<double>(i + 1);
        const double fm = f(0.5 * (lo + hi));
        const double fh = f(hi);
        evals += 2;
        Panel p = make_panel(f, lo, hi, f_left, fm, fh, evals);
        total_error += p.error;
        panels.push_back(p);
        f_left = fh;
    }
    std::make_heap(panels.begin(), panels.end());
    while (total_error > opts.abs_tol && evals + 4 <= opts.max_evaluations) {
        const Panel worst = panels.front();
        // Stop refining once the panel is at floating-point resolution.
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) || worst.b - worst.a < 1e-14 * std::abs(mid)) break;
        std::pop_heap(panels.begin(), panels.end());
        panels.pop_back();
        Panel left = make_panel(f, worst.a, mid, worst.fa, worst.fq1, worst.fm, evals);
        Panel right = make_panel(f, mid, worst.b, worst.fm, worst.fq3, worst.fb, evals);
        total_error += left.error + right.error - worst.error;
        panels.push_back(left);
        std::push_heap(panels.begin(), panels.end());
        panels.push_back(right);
        std::push_heap(panels.begin(), panels.end());
        // Running sums drift; recompute occasionally.
        if (evals % 4096 < 4) {
            total_error = 0.0;
            for (const Panel& p : panels) total_error += p.error;
        }
    }
    // Compensated final sum.
    std::vector<Panel> all = std::move(panels);
    std::sort(all.begin(), all.end());
    double sum = 0.0;
    double comp = 0.0;
    double err = 0.0;
    for (auto it = all.begin(); it != all.end(); ++it) {
        const double y = it->value - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        err += it->error;
    }
    result.value = sum;
    result.error = err;
    result.evaluations = evals;
    result.converged = std::isfinite(sum) && err <= opts.abs_tol;
    return result;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opts, const char* what) {
    const IntegrationResult r = integrate_adaptive(f, a, b, opts);
    if (!r.converged) throw AccuracyError(std::string(what) + ": quadrature did not converge", r.value, r.error);
    return r.value;
}

}  // namespace lagsieve
