#include "lagsieve/transmission.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lagsieve/errors.hpp"
#include "lagsieve/quadrature.hpp"

namespace lagsieve {

void validate(const Observation& o) {
    const auto bad = [&](const std::string& why) {
        throw ValidationError("observation '" + o.id + "': " + why);
    };
    if (!std::isfinite(o.s1) || !std::isfinite(o.s2) || !std::isfinite(o.w_tilde)) bad("non-finite time");
    if (o.s1 < 0.0) bad("s1 < 0");
    if (o.s2 < 0.0) bad("s2 < 0");
    if (o.w_tilde < 0.0) bad("w_tilde < 0");
    if (o.w_tilde > o.s1) bad("w_tilde > s1");
}

double ExposureKernel::h_integral(double w, int location) const {
    if (!(w > 0.0)) return 0.0;
    const QuadratureRule rule = gauss_legendre(64, 0.0, w);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * h(rule.nodes[i], location);
    return s;
}

ExposureModel::ExposureModel(std::map<int, double> rates) : rates_(std::move(rates)) {
    for (const auto& [loc, r] : rates_) {
        if (!std::isfinite(r)) throw ValidationError("exposure rate for location " + std::to_string(loc) + " is not finite");
    }
}

double ExposureModel::rate(int location) const {
    const auto it = rates_.find(location);
    if (it == rates_.end()) {
        throw ValidationError("no exposure rate configured for location " + std::to_string(location));
    }
    return it->second;
}

void ExposureModel::set_rate(int location, double rate) {
    if (!std::isfinite(rate)) throw ValidationError("exposure rate must be finite");
    rates_[location] = rate;
}

double ExposureModel::h(double u, int location) const { return std::exp(-rate(location) * u); }

double ExposureModel::h_integral(double w, int location) const {
    if (!(w > 0.0)) return 0.0;
    const double r = rate(location);
    if (r == 0.0) return w;
    return -std::expm1(-r * w) / r;
}

void QuadratureConfig::validate() const {
    if (nodes_t < 8 || nodes_y < 8) throw ValidationError("quadrature node counts must be at least 8");
    if (!(log_floor > 0.0) || !(log_floor < 1.0)) throw ValidationError("log_floor must lie in (0, 1)");
}

namespace {

// Accumulates with Kahan compensation.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// Outer integration limit: phi_I(S2 - t - y) vanishes for every y once t > S2.
double outer_limit(const Observation& o) { return std::min(o.w_tilde, o.s2); }

}  // namespace

double obs_loglik(const Observation& o, const ExposureModel& em, const LaguerreDensity& phi_i,
                  const LaguerreDensity& phi_g, const QuadratureConfig& q) {
    validate(o);
    q.validate();
    const double penalty = std::log(q.log_floor);
    const double r = em.rate(o.location);
    const double t_hi = outer_limit(o);
    if (!(t_hi > 0.0)) return penalty;

    const QuadratureRule outer = gauss_legendre(q.nodes_t, 0.0, t_hi);
    const QuadratureRule& inner = gauss_legendre(q.nodes_y);
    const double slope = 2.0 + r;
    double shift = -std::numeric_limits<double>::infinity();
    for (double t : outer.nodes) shift = std::max(shift, slope * t);

    double total = 0.0;
    for (std::size_t j = 0; j < outer.size(); ++j) {
        const double t = outer.nodes[j];
        const double span = o.s2 - t;
        const double p1 = phi_i.poly(o.s1 - t);
        double acc = 0.0;
        for (std::size_t k = 0; k < inner.size(); ++k) {
            const double y = 0.5 * span * (inner.nodes[k] + 1.0);
            const double pi2 = phi_i.poly(span - y);
            const double pg = phi_g.poly(y);
            acc += inner.weights[k] * pi2 * pi2 * pg * pg;
        }
        total += outer.weights[j] * std::exp(slope * t - shift) * p1 * p1 * 0.5 * span * acc;
    }
    if (!(total > 0.0)) return penalty;
    const double value = std::log(total) + shift - o.s1 - o.s2;
    return value > penalty ? value : penalty;
}

double dataset_loglik(std::span<const Observation> data, const ExposureModel& em, const LaguerreDensity& phi_i,
                      const LaguerreDensity& phi_g, const QuadratureConfig& q) {
    CompensatedSum s;
    for (const Observation& o : data) s.add(obs_loglik(o, em, phi_i, phi_g, q));
    return s.sum;
}

double joint_density(double x1, double x2, double w, int location, const ExposureKernel& kernel,
                     const GenericDensity& phi_w, const GenericDensity& phi_i, const GenericDensity& phi_g,
                     const QuadratureConfig& q) {
    if (x1 < 0.0 || x2 < 0.0 || w < 0.0) return 0.0;
    const double h_int = kernel.h_integral(w, location);
    if (!(h_int > 0.0)) throw DegenerateError("joint_density: kernel integral over the window vanishes");
    const double normalizer = 1.0 / h_int;
    const double t_hi = std::min({x1, w, x2});
    if (!(t_hi > 0.0)) return 0.0;
    const QuadratureRule outer = gauss_legendre(q.nodes_t, 0.0, t_hi);
    const QuadratureRule& inner = gauss_legendre(q.nodes_y);
    double total = 0.0;
    for (std::size_t j = 0; j < outer.size(); ++j) {
        const double t = outer.nodes[j];
        const double span = x2 - t;
        double acc = 0.0;
        for (std::size_t k = 0; k < inner.size(); ++k) {
            const double y = 0.5 * span * (inner.nodes[k] + 1.0);
            acc += inner.weights[k] * phi_g.pdf(y) * phi_i.pdf(span - y);
        }
        total += outer.weights[j] * kernel.h(w - t, location) * phi_i.pdf(x1 - t) * 0.5 * span * acc;
    }
    return normalizer * phi_w.pdf(w) * total;
}

// Pair index P enumerates (a, b) with a <= b; its basis function is
// L_a L_b, doubled off the diagonal, and its coefficient theta_a theta_b.
namespace {

std::vector<std::pair<int, int>> pairs_for(int m) {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a <= m; ++a)
        for (int b = a; b <= m; ++b) out.emplace_back(a, b);
    return out;
}

void pair_basis(std::span<const double> lag, const std::vector<std::pair<int, int>>& pairs, std::span<double> out) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        const double v = lag[static_cast<std::size_t>(a)] * lag[static_cast<std::size_t>(b)];
        out[p] = (a == b) ? v : 2.0 * v;
    }
}

void pair_coefficients(std::span<const double> theta, const std::vector<std::pair<int, int>>& pairs,
                       std::span<double> out) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        out[p] = theta[static_cast<std::size_t>(a)] * theta[static_cast<std::size_t>(b)];
    }
}

}  // namespace

CompiledLikelihood::CompiledLikelihood(std::span<const Observation> data, const ExposureModel& em, int m1, int m2,
                                       const QuadratureConfig& q)
    : m1_(m1), m2_(m2), log_floor_(std::log(q.log_floor)) {
    q.validate();
    if (m1 < 0 || m2 < 0 || m1 > kMaxLaguerreDegree || m2 > kMaxLaguerreDegree) {
        throw UnsupportedDegreeError("CompiledLikelihood: unsupported degree");
    }
    const auto pairs1 = pairs_for(m1);
    const auto pairs2 = pairs_for(m2);
    n1_ = pairs1.size();
    n2_ = pairs2.size();
    const std::size_t sym = n1_ * (n1_ + 1) / 2;
    const std::size_t block = sym * n2_;
    const std::size_t mmax = static_cast<std::size_t>(std::max(m1, m2)) + 1;

    shift_.assign(data.size(), 0.0);
    empty_.assign(data.size(), 0);
    tensor_.assign(data.size() * block, 0.0);

    const QuadratureRule& inner = gauss_legendre(q.nodes_y);
    std::vector<double> lag_u(mmax), lag_y(mmax), lag_v(mmax);
    std::vector<double> a_u(n1_), a_v(n1_), b_y(n2_);
    std::vector<double> inner_qr(n1_ * n2_);
    std::vector<double> full(n1_ * n1_ * n2_);

    for (std::size_t i = 0; i < data.size(); ++i) {
        const Observation& o = data[i];
        validate(o);
        const double r = em.rate(o.location);
        const double t_hi = outer_limit(o);
        if (!(t_hi > 0.0)) {
            empty_[i] = 1;
            continue;
        }
        const QuadratureRule outer = gauss_legendre(q.nodes_t, 0.0, t_hi);
        const double slope = 2.0 + r;
        double shift = -std::numeric_limits<double>::infinity();
        for (double t : outer.nodes) shift = std::max(shift, slope * t);
        shift_[i] = shift - o.s1 - o.s2;

        std::fill(full.begin(), full.end(), 0.0);
        for (std::size_t j = 0; j < outer.size(); ++j) {
            const double t = outer.nodes[j];
            const double span = o.s2 - t;
            std::fill(inner_qr.begin(), inner_qr.end(), 0.0);
            for (std::size_t k = 0; k < inner.size(); ++k) {
                const double y = 0.5 * span * (inner.nodes[k] + 1.0);
                laguerre_all(y, lag_y);
                laguerre_all(span - y, lag_v);
                pair_basis(std::span<const double>(lag_v.data(), static_cast<std::size_t>(m1) + 1), pairs1, a_v);
                pair_basis(std::span<const double>(lag_y.data(), static_cast<std::size_t>(m2) + 1), pairs2, b_y);
                const double w = inner.weights[k];
                for (std::size_t qi = 0; qi < n1_; ++qi) {
                    const double wa = w * a_v[qi];
                    double* row = inner_qr.data() + qi * n2_;
                    for (std::size_t ri = 0; ri < n2_; ++ri) row[ri] += wa * b_y[ri];
                }
            }
            laguerre_all(o.s1 - t, lag_u);
            pair_basis(std::span<const double>(lag_u.data(), static_cast<std::size_t>(m1) + 1), pairs1, a_u);
            const double wt = outer.weights[j] * std::exp(slope * t - shift) * 0.5 * span;
            for (std::size_t pi = 0; pi < n1_; ++pi) {
                const double wa = wt * a_u[pi];
                double* dst = full.data() + pi * n1_ * n2_;
                for (std::size_t x = 0; x < n1_ * n2_; ++x) dst[x] += wa * inner_qr[x];
            }
        }
        // Symmetrize over (P, Q).
        double* out = tensor_.data() + i * block;
        std::size_t s = 0;
        for (std::size_t pi = 0; pi < n1_; ++pi) {
            for (std::size_t qi = pi; qi < n1_; ++qi, ++s) {
                for (std::size_t ri = 0; ri < n2_; ++ri) {
                    const double pq = full[(pi * n1_ + qi) * n2_ + ri];
                    out[s * n2_ + ri] = (pi == qi) ? pq : pq + full[(qi * n1_ + pi) * n2_ + ri];
                }
            }
        }
    }
}

std::vector<double> CompiledLikelihood::terms(std::span<const double> theta_i, std::span<const double> theta_g) const {
    if (theta_i.size() != static_cast<std::size_t>(m1_) + 1 || theta_g.size() != static_cast<std::size_t>(m2_) + 1) {
        throw ValidationError("CompiledLikelihood: coefficient vector has the wrong degree");
    }
    const auto pairs1 = pairs_for(m1_);
    const auto pairs2 = pairs_for(m2_);
    std::vector<double> q1(n1_), q2(n2_);
    pair_coefficients(theta_i, pairs1, q1);
    pair_coefficients(theta_g, pairs2, q2);
    const std::size_t sym = n1_ * (n1_ + 1) / 2;
    std::vector<double> coef(sym);
    std::size_t s = 0;
    for (std::size_t pi = 0; pi < n1_; ++pi)
        for (std::size_t qi = pi; qi < n1_; ++qi, ++s) coef[s] = q1[pi] * q1[qi];

    std::vector<double> out(shift_.size());
    const std::size_t block = sym * n2_;
    for (std::size_t i = 0; i < shift_.size(); ++i) {
        if (empty_[i]) {
            out[i] = log_floor_;
            continue;
        }
        const double* t = tensor_.data() + i * block;
        double total = 0.0;
        for (std::size_t k = 0; k < sym; ++k) {
            double inner = 0.0;
            const double* row = t + k * n2_;
            for (std::size_t ri = 0; ri < n2_; ++ri) inner += q2[ri] * row[ri];
            total += coef[k] * inner;
        }
        if (!(total > 0.0)) {
            out[i] = log_floor_;
            continue;
        }
        const double v = std::log(total) + shift_[i];
        out[i] = v > log_floor_ ? v : log_floor_;
    }
    return out;
}

double CompiledLikelihood::operator()(std::span<const double> theta_i, std::span<const double> theta_g) const {
    CompensatedSum s;
    for (double v : terms(theta_i, theta_g)) s.add(v);
    return s.sum;
}

}  // namespace lagsieve
