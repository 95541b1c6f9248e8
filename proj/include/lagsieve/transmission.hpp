#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lagsieve/densities.hpp"
#include "lagsieve/laguerre.hpp"

namespace lagsieve {

/// One transmission pair. Times are in days relative to the start of the
/// infector's exposure window.
struct Observation {
    std::string id;
    double s1 = 0.0;       // symptom onset, infector
    double s2 = 0.0;       // symptom onset, infectee
    double w_tilde = 0.0;  // min(W, s1)
    int location = 0;
};

/// Throws ValidationError unless s1, s2, w_tilde are finite, nonnegative
/// and w_tilde <= s1.
void validate(const Observation& o);

/// Kernel h(u | c) of the infection time within the exposure window,
/// T1 | (W, C) ~ n(W, C) h(W - t | C) on [0, W].
class ExposureKernel {
public:
    virtual ~ExposureKernel() = default;
    virtual double h(double u, int location) const = 0;
    /// integral_0^w h(u | c) du; the default uses Gauss-Legendre quadrature.
    virtual double h_integral(double w, int location) const;
};

/// Exponential-growth kernel h(u | c) = exp(-r(c) u); r = 0 is the uniform
/// kernel. The only kernel the likelihood is specialised for.
class ExposureModel : public ExposureKernel {
public:
    ExposureModel() = default;
    explicit ExposureModel(std::map<int, double> rates);

    /// Throws ValidationError for an unknown location.
    double rate(int location) const;
    void set_rate(int location, double rate);
    bool has(int location) const { return rates_.count(location) > 0; }
    const std::map<int, double>& rates() const noexcept { return rates_; }

    double h(double u, int location) const override;
    double h_integral(double w, int location) const override;

private:
    std::map<int, double> rates_;
};

struct QuadratureConfig {
    std::size_t nodes_t = 64;  // outer Gauss-Legendre nodes (infection time)
    std::size_t nodes_y = 64;  // inner Gauss-Legendre nodes (generation time)
    double log_floor = 1e-300; // likelihood floor; log(log_floor) is the penalty

    void validate() const;
};

/// log integral_0^{S2} phi_G(y) integral_0^{W~} e^{r(C) t} phi_I(S1-t) phi_I(S2-t-y) dt dy
/// by iterated Gauss-Legendre quadrature, or log(log_floor) if the integral
/// does not exceed log_floor.
double obs_loglik(const Observation& o, const ExposureModel& em, const LaguerreDensity& phi_i,
                  const LaguerreDensity& phi_g, const QuadratureConfig& q = {});

/// Compensated sum of obs_loglik; 0 for an empty dataset.
double dataset_loglik(std::span<const Observation> data, const ExposureModel& em, const LaguerreDensity& phi_i,
                      const LaguerreDensity& phi_g, const QuadratureConfig& q = {});

/// Conditional joint density of (S1, S2, W) given C = c at (x1, x2, w).
/// Zero outside the nonnegative orthant; DegenerateError when the kernel
/// integral over [0, w] vanishes.
double joint_density(double x1, double x2, double w, int location, const ExposureKernel& kernel,
                     const GenericDensity& phi_w, const GenericDensity& phi_i, const GenericDensity& phi_g,
                     const QuadratureConfig& q = {});

/// The quadrature of obs_loglik contracted into a fixed tensor per
/// observation for degrees (m1, m2).
///
/// The integrand is e^{(2+r)t - S1 - S2} times squared Laguerre
/// polynomials, so the quadrature sum is a polynomial in the symmetric
/// products theta_a theta_b of each coefficient vector. Building the tensor
/// costs one pass over the nodes; each later evaluation costs
/// O(n1^2 n2) with n = (m+1)(m+2)/2, independent of the node counts.
class CompiledLikelihood {
public:
    CompiledLikelihood(std::span<const Observation> data, const ExposureModel& em, int m1, int m2,
                       const QuadratureConfig& q = {});

    int m1() const noexcept { return m1_; }
    int m2() const noexcept { return m2_; }
    std::size_t size() const noexcept { return shift_.size(); }

    /// Dataset log-likelihood at (theta_i, theta_g); values match
    /// dataset_loglik up to rounding.
    double operator()(std::span<const double> theta_i, std::span<const double> theta_g) const;

    /// Per-observation terms, in data order.
    std::vector<double> terms(std::span<const double> theta_i, std::span<const double> theta_g) const;

    /// log(log_floor), the per-observation penalty.
    double log_floor() const noexcept { return log_floor_; }

private:
    int m1_;
    int m2_;
    std::size_t n1_;  // symmetric products of theta_i
    std::size_t n2_;  // symmetric products of theta_g
    double log_floor_;
    std::vector<double> shift_;   // log-scale of each observation
    std::vector<char> empty_;     // integration region is empty
    std::vector<double> tensor_;  // per observation: [pair P<=Q][R]
};

}  // namespace lagsieve
