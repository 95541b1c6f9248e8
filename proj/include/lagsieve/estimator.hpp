#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagsieve/laguerre.hpp"
#include "lagsieve/transmission.hpp"

namespace lagsieve {

struct FitOptions {
    std::size_t n_starts = 5;
    std::size_t max_iters = 2000;
    double simplex_tol = 1e-8;
    std::uint64_t seed = 1;
    // Fresh simplices rebuilt at the best point after each convergence,
    // per start. Nelder-Mead can stall on a degenerate simplex.
    std::size_t polish_restarts = 2;
    // BIC parameter count: m1 + m2 free angles by default, or the raw
    // coefficient count m1 + m2 + 2 when set.
    bool bic_counts_coefficients = false;
    QuadratureConfig quadrature;

    void validate() const;
};

struct StartDiagnostics {
    double initial_loglik = 0.0;
    double final_loglik = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct FitResult {
    LaguerreDensity phi_i_hat;
    LaguerreDensity phi_g_hat;
    double loglik = 0.0;
    double bic = 0.0;
    std::size_t n = 0;
    std::vector<StartDiagnostics> starts;
    FitOptions options;

    int m1() const { return phi_i_hat.degree(); }
    int m2() const { return phi_g_hat.degree(); }
};

/// Sieve maximum likelihood over (theta_I, theta_G) of degrees (m1, m2).
///
/// The two angle vectors are optimized jointly by Nelder-Mead with the
/// coordinates folded into [0, pi]. Start k draws its initial angles
/// uniformly from [0, pi] using substream k of opts.seed; the best start
/// wins, ties going to the lowest index. For m1 = m2 = 0 there is nothing
/// to optimize and Exp(1) is returned for both densities.
///
/// Throws ValidationError for empty data or bad options and DegenerateError
/// when every start ends with every observation on the likelihood floor.
FitResult fit(std::span<const Observation> data, const ExposureModel& em, int m1, int m2, const FitOptions& opts = {});

/// -2 loglik + (m1 + m2) log(n). One free angle per coefficient beyond the
/// first, since each theta lives on a unit sphere; count_coefficients
/// charges m1 + m2 + 2 instead.
double bic(double loglik, int m1, int m2, std::size_t n, bool count_coefficients = false);

struct ModelCell {
    int m1 = 0;
    int m2 = 0;
    std::optional<FitResult> fit;  // empty when the fit failed
    std::string error;
};

struct Selection {
    std::pair<int, int> best;
    std::vector<ModelCell> table;  // grid order
};

/// Fits every (m1, m2) in the grid and picks the smallest BIC; ties go to
/// the smaller m1 + m2, then the smaller m1. Failed cells are recorded and
/// excluded. Throws DegenerateError if every cell fails.
Selection select_model(std::span<const Observation> data, const ExposureModel& em,
                       std::span<const std::pair<int, int>> grid, const FitOptions& opts = {});

/// Parses "1..4x1..4" or "2x1" or "0..1x0..1" into a degree grid.
std::vector<std::pair<int, int>> parse_grid(const std::string& spec);

}  // namespace lagsieve
