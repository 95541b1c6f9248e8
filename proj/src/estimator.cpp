#include "lagsieve/estimator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lagsieve/errors.hpp"
#include "lagsieve/nelder_mead.hpp"
#include "lagsieve/rng.hpp"

namespace lagsieve {

void FitOptions::validate() const {
    if (n_starts < 1) throw ValidationError("fit: n_starts must be at least 1");
    if (max_iters < 1) throw ValidationError("fit: max_iters must be at least 1");
    if (!(simplex_tol > 0.0)) throw ValidationError("fit: simplex_tol must be positive");
    quadrature.validate();
}

namespace {

struct AngleSplit {
    std::vector<double> theta_i;
    std::vector<double> theta_g;
};

AngleSplit split_angles(std::span<const double> angles, int m1) {
    std::vector<double> a1, a2;
    a1.reserve(static_cast<std::size_t>(m1));
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double folded = fold_angle(angles[i]);
        (i < static_cast<std::size_t>(m1) ? a1 : a2).push_back(folded);
    }
    return {angles_to_theta(a1), angles_to_theta(a2)};
}

}  // namespace

double bic(double loglik, int m1, int m2, std::size_t n, bool count_coefficients) {
    if (n < 1) throw ValidationError("bic: sample size must be at least 1");
    const int k = m1 + m2 + (count_coefficients ? 2 : 0);
    return -2.0 * loglik + static_cast<double>(k) * std::log(static_cast<double>(n));
}

FitResult fit(std::span<const Observation> data, const ExposureModel& em, int m1, int m2, const FitOptions& opts) {
    if (data.empty()) throw ValidationError("fit: empty dataset");
    if (m1 < 0 || m2 < 0) throw ValidationError("fit: degrees must be nonnegative");
    opts.validate();
    const CompiledLikelihood lik(data, em, m1, m2, opts.quadrature);
    const std::size_t dim = static_cast<std::size_t>(m1 + m2);

    const auto loglik_at = [&](std::span<const double> angles) {
        const AngleSplit s = split_angles(angles, m1);
        return lik(s.theta_i, s.theta_g);
    };
    const auto objective = [&](std::span<const double> angles) { return -loglik_at(angles); };

    std::vector<double> best_angles;
    double best_loglik = -std::numeric_limits<double>::infinity();
    std::vector<StartDiagnostics> starts;

    if (dim == 0) {
        best_loglik = loglik_at({});
        starts.push_back({best_loglik, best_loglik, 0, 1, true});
    } else {
        NelderMeadOptions nm;
        nm.max_iterations = opts.max_iters;
        nm.f_tol = opts.simplex_tol;
        nm.x_tol = 1e-6;
        nm.initial_step = 0.5;
        for (std::size_t k = 0; k < opts.n_starts; ++k) {
            Rng rng(derive_seed(opts.seed, k));
            std::vector<double> x0(dim);
            for (double& a : x0) a = rng.uniform(0.0, std::numbers::pi);
            StartDiagnostics diag;
            diag.initial_loglik = loglik_at(x0);

            NelderMeadResult res = nelder_mead(objective, x0, nm);
            diag.iterations = res.iterations;
            diag.evaluations = res.evaluations;
            for (std::size_t p = 0; p < opts.polish_restarts; ++p) {
                NelderMeadResult again = nelder_mead(objective, res.x, nm);
                diag.iterations += again.iterations;
                diag.evaluations += again.evaluations;
                const double gain = res.value - again.value;
                if (again.value <= res.value) res = std::move(again);
                if (!(gain > opts.simplex_tol * (1.0 + std::abs(res.value)))) break;
            }
            diag.converged = res.converged;
            diag.final_loglik = -res.value;
            if (diag.final_loglik > best_loglik) {
                best_loglik = diag.final_loglik;
                best_angles = res.x;
            }
            starts.push_back(diag);
        }
    }

    const double floor_total = static_cast<double>(data.size()) * lik.log_floor();
    if (!(best_loglik > floor_total)) {
        throw DegenerateError("fit: every start ended on the likelihood floor");
    }
    const AngleSplit s = split_angles(best_angles, m1);
    FitResult result{LaguerreDensity(s.theta_i), LaguerreDensity(s.theta_g), best_loglik, 0.0, data.size(),
                     std::move(starts), opts};
    result.bic = bic(best_loglik, m1, m2, data.size(), opts.bic_counts_coefficients);
    return result;
}

Selection select_model(std::span<const Observation> data, const ExposureModel& em,
                       std::span<const std::pair<int, int>> grid, const FitOptions& opts) {
    if (grid.empty()) throw ValidationError("select_model: empty grid");
    Selection sel;
    const ModelCell* best = nullptr;
    for (const auto& [m1, m2] : grid) {
        ModelCell cell{m1, m2, std::nullopt, {}};
        try {
            cell.fit = fit(data, em, m1, m2, opts);
        } catch (const NumericalError& e) {
            cell.error = e.what();
        } catch (const ValidationError& e) {
            cell.error = e.what();
        }
        sel.table.push_back(std::move(cell));
    }
    for (const ModelCell& cell : sel.table) {
        if (!cell.fit) continue;
        if (!best) {
            best = &cell;
            continue;
        }
        const double b = cell.fit->bic;
        const double bb = best->fit->bic;
        const bool better = b < bb || (b == bb && (cell.m1 + cell.m2 < best->m1 + best->m2 ||
                                                   (cell.m1 + cell.m2 == best->m1 + best->m2 && cell.m1 < best->m1)));
        if (better) best = &cell;
    }
    if (!best) throw DegenerateError("select_model: every grid cell failed");
    sel.best = {best->m1, best->m2};
    return sel;
}

namespace {

std::vector<int> parse_range(const std::string& s, const std::string& whole) {
    const auto fail = [&]() -> std::vector<int> {
        throw ValidationError("bad degree grid '" + whole + "' (expected e.g. 1..4x1..4)");
    };
    std::vector<int> out;
    try {
        const auto dots = s.find("..");
        if (dots != std::string::npos) {
            std::size_t used_lo = 0, used_hi = 0;
            const std::string lo_s = s.substr(0, dots), hi_s = s.substr(dots + 2);
            const int lo = std::stoi(lo_s, &used_lo);
            const int hi = std::stoi(hi_s, &used_hi);
            if (used_lo != lo_s.size() || used_hi != hi_s.size() || lo > hi) return fail();
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) {
                std::size_t used = 0;
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) return fail();
            }
        }
    } catch (const std::logic_error&) {
        return fail();
    }
    if (out.empty()) return fail();
    for (int v : out)
        if (v < 0 || v > kMaxLaguerreDegree) return fail();
    return out;
}

}  // namespace

std::vector<std::pair<int, int>> parse_grid(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos) throw ValidationError("bad degree grid '" + spec + "' (expected e.g. 1..4x1..4)");
    const auto r1 = parse_range(spec.substr(0, x), spec);
    const auto r2 = parse_range(spec.substr(x + 1), spec);
    std::vector<std::pair<int, int>> grid;
    for (int a : r1)
        for (int b : r2) grid.emplace_back(a, b);
    return grid;
}

}  // namespace lagsieve
