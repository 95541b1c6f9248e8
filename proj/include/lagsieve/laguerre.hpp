#pragma once

#include <span>

#include "lagsieve/quadrature.hpp"
#include <vector>

namespace lagsieve {

/// Highest polynomial degree accepted anywhere in the library. The forward
/// recurrence is stable well beyond this; the ceiling bounds the size of
/// coefficient vectors read from files and the command line.
inline constexpr int kMaxLaguerreDegree = 60;


/// L_k(x) via (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.
/// Throws UnsupportedDegreeError for k < 0 or k > kMaxLaguerreDegree.
double laguerre_eval(int k, double x);

/// Writes L_0(x), ..., L_{out.size()-1}(x) into `out`.
void laguerre_all(double x, std::span<double> out);


/// Hyperspherical map with unit radius. angles has length m, each in
/// [0, pi]; the result has length m+1 and is sign-canonical (first nonzero
/// coordinate >= 0).
std::vector<double> angles_to_theta(std::span<const double> angles);

/// Inverse of angles_to_theta modulo sign. The representative with
/// nonnegative last coordinate is used so that every angle lies in [0, pi].
/// Throws ValidationError for an empty or zero vector.
std::vector<double> theta_to_angles(std::span<const double> theta);

/// Folds an unconstrained coordinate into [0, pi] by reflecting at the
/// interval ends (triangle wave of period 2 pi).
double fold_angle(double x);

/// Flips theta so that its first nonzero coordinate is nonnegative.
std::vector<double> canonical_sign(std::vector<double> theta);

/// Density e^{-x} (sum_k theta_k L_k(x))^2 on [0, inf) with |theta|_2 = 1.
///
/// theta and -theta describe the same density. Immutable after
/// construction; all member functions are const and thread-safe.
class LaguerreDensity {
public:
    /// Exp(1), i.e. theta = (1).
    LaguerreDensity();

    /// theta must have unit norm within 1e-9; it is renormalized exactly.
    explicit LaguerreDensity(std::vector<double> theta);

    /// Normalizes an arbitrary nonzero coefficient vector.
    static LaguerreDensity from_coefficients(std::vector<double> coefficients);

    static LaguerreDensity from_angles(std::span<const double> angles);

    int degree() const noexcept { return static_cast<int>(theta_.size()) - 1; }
    const std::vector<double>& theta() const noexcept { return theta_; }

    /// sum_k theta_k L_k(x)
    double poly(double x) const;

    double pdf(double x) const;

    /// P(X > x) = e^{-x} integral_0^inf e^{-u} p(x+u)^2 du. The integrand is
    /// a polynomial of degree 2m against e^{-u}, so an (m+1)-node
    /// Gauss-Laguerre rule gives it exactly as a sum of nonnegative terms.
    double survival(double x) const;
    /// P(X <= x) = 1 - survival(x).
    double cdf(double x) const;

    /// Smallest x with cdf(x) >= p, p in (0, 1).
    double quantile(double p) const;
    /// Smallest x with survival(x) <= q, q in (0, 1); accurate for tiny q.
    double upper_quantile(double q) const;

    /// integral_0^inf e^{-r t} pdf(t) dt, r > -1. Exact by the same rule after
    /// substituting u = (1+r) t.
    double exp_tilted_integral(double r) const;

private:
    std::vector<double> theta_;
    const QuadratureRule* rule_;  // Gauss-Laguerre with degree() + 2 nodes
};

}  // namespace lagsieve
