#include <doctest.h>

#include <cmath>

#include "lagsieve/distances.hpp"
#include "lagsieve/errors.hpp"
#include "lagsieve/estimator.hpp"
#include "lagsieve/simulator.hpp"

using namespace lagsieve;
using doctest::Approx;

namespace {

std::vector<Observation> simulated(std::uint64_t seed, std::size_t n = 40) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n = n;
    return sample_dataset(cfg);
}

LaguerreDensity negated(const LaguerreDensity& d) {
    std::vector<double> t = d.theta();
    for (double& x : t) x = -x;
    return LaguerreDensity(t);
}

}  // namespace

TEST_CASE("bic arithmetic") {
    CHECK(bic(-100.0, 2, 2, 40) == Approx(200.0 + 4.0 * std::log(40.0)).epsilon(1e-14));
    CHECK(bic(-100.0, 2, 2, 40) == Approx(214.7555).epsilon(1e-6));
    CHECK(bic(-37.5, 0, 0, 123) == 75.0);
    CHECK(bic(-100.0, 2, 2, 40, true) == Approx(200.0 + 6.0 * std::log(40.0)).epsilon(1e-14));
    CHECK_THROWS_AS(bic(-1.0, 1, 1, 0), ValidationError);
}

TEST_CASE("zero degrees need no optimization") {
    const auto data = simulated(2);
    const ExposureModel em = GeneratorConfig{}.exposure_model();
    const FitResult f = fit(data, em, 0, 0);
    CHECK(f.phi_i_hat.theta() == std::vector<double>{1.0});
    CHECK(f.phi_g_hat.theta() == std::vector<double>{1.0});
    CHECK(f.loglik == dataset_loglik(data, em, LaguerreDensity(), LaguerreDensity()));
    CHECK(f.bic == Approx(-2.0 * f.loglik));
    CHECK(f.n == data.size());
}

TEST_CASE("fit reaches at least the likelihood of the projected truths") {
    const GeneratorConfig truth;
    const LaguerreDensity target_i = best_approx(truth.phi_i_true, 2);
    const LaguerreDensity target_g = best_approx(truth.phi_g_true, 2);
    const ExposureModel em = truth.exposure_model();
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const auto data = simulated(seed);
        const FitResult f = fit(data, em, 2, 2);
        CAPTURE(seed);
        CHECK(f.loglik >= dataset_loglik(data, em, target_i, target_g) - 1e-6);
        CHECK(f.loglik == Approx(dataset_loglik(data, em, f.phi_i_hat, f.phi_g_hat)).epsilon(1e-10));
        CHECK(f.bic == Approx(bic(f.loglik, 2, 2, data.size())).epsilon(1e-14));

        REQUIRE(f.starts.size() == 5);
        double best = -INFINITY;
        for (const StartDiagnostics& s : f.starts) {
            CHECK(s.final_loglik >= s.initial_loglik);
            CHECK(f.loglik >= s.initial_loglik);
            best = std::max(best, s.final_loglik);
        }
        CHECK(f.loglik == best);

        double norm_i = 0.0, norm_g = 0.0;
        for (double x : f.phi_i_hat.theta()) norm_i += x * x;
        for (double x : f.phi_g_hat.theta()) norm_g += x * x;
        CHECK(norm_i == Approx(1.0).epsilon(1e-12));
        CHECK(norm_g == Approx(1.0).epsilon(1e-12));

        const double flipped = dataset_loglik(data, em, negated(f.phi_i_hat), negated(f.phi_g_hat));
        CHECK(std::abs(flipped - f.loglik) < 1e-9);
    }
}

TEST_CASE("fit is deterministic given the seed") {
    const auto data = simulated(8);
    const ExposureModel em = GeneratorConfig{}.exposure_model();
    FitOptions opts;
    opts.seed = 42;
    const FitResult a = fit(data, em, 2, 1, opts);
    const FitResult b = fit(data, em, 2, 1, opts);
    CHECK(a.loglik == b.loglik);
    CHECK(a.phi_i_hat.theta() == b.phi_i_hat.theta());
    CHECK(a.phi_g_hat.theta() == b.phi_g_hat.theta());
    for (std::size_t k = 0; k < a.starts.size(); ++k) CHECK(a.starts[k].initial_loglik == b.starts[k].initial_loglik);

    opts.seed = 43;
    const FitResult c = fit(data, em, 2, 1, opts);
    CHECK(c.starts[0].initial_loglik != a.starts[0].initial_loglik);
}

TEST_CASE("a larger incubation degree does not lose likelihood") {
    const ExposureModel em = GeneratorConfig{}.exposure_model();
    int holds = 0;
    const int seeds = 5;
    for (int seed = 1; seed <= seeds; ++seed) {
        const auto data = simulated(100 + seed);
        if (fit(data, em, 2, 2).loglik <= fit(data, em, 3, 2).loglik + 1e-4) ++holds;
    }
    CHECK(holds * 2 > seeds);
}

TEST_CASE("fit rejects bad input") {
    const ExposureModel em = GeneratorConfig{}.exposure_model();
    CHECK_THROWS_AS(fit({}, em, 1, 1), ValidationError);
    const auto data = simulated(1, 5);
    CHECK_THROWS_AS(fit(data, em, -1, 1), ValidationError);
    CHECK_THROWS_AS(fit(data, em, 61, 1), ValidationError);
    FitOptions opts;
    opts.n_starts = 0;
    CHECK_THROWS_AS(fit(data, em, 1, 1, opts), ValidationError);
    opts = {};
    opts.simplex_tol = 0.0;
    CHECK_THROWS_AS(fit(data, em, 1, 1, opts), ValidationError);
    CHECK_THROWS_AS(fit(data, ExposureModel({{5, 0.0}}), 1, 1), ValidationError);
}

TEST_CASE("fit fails when every observation sits on the floor") {
    // Empty exposure windows leave nothing to integrate.
    std::vector<Observation> data{{"a", 3.0, 5.0, 0.0, 0}, {"b", 4.0, 9.0, 0.0, 0}};
    CHECK_THROWS_AS(fit(data, ExposureModel({{0, 0.0}}), 1, 1), DegenerateError);
    const std::vector<std::pair<int, int>> grid{{1, 1}, {0, 1}};
    CHECK_THROWS_AS(select_model(data, ExposureModel({{0, 0.0}}), grid), DegenerateError);
}

TEST_CASE("model selection over a grid") {
    const auto data = simulated(6);
    const ExposureModel em = GeneratorConfig{}.exposure_model();

    const std::vector<std::pair<int, int>> single{{2, 1}};
    const Selection one = select_model(data, em, single);
    CHECK(one.best == std::pair{2, 1});
    REQUIRE(one.table.size() == 1);
    REQUIRE(one.table[0].fit.has_value());
    CHECK(one.table[0].fit->loglik == fit(data, em, 2, 1).loglik);

    const auto grid = parse_grid("0..2x0..1");
    const Selection sel = select_model(data, em, grid);
    REQUIRE(sel.table.size() == 6);
    double best = INFINITY;
    for (const ModelCell& c : sel.table) {
        REQUIRE(c.fit.has_value());
        best = std::min(best, c.fit->bic);
    }
    for (const ModelCell& c : sel.table)
        if (std::pair{c.m1, c.m2} == sel.best) CHECK(c.fit->bic == best);

    CHECK_THROWS_AS(select_model(data, em, std::vector<std::pair<int, int>>{}), ValidationError);
}

TEST_CASE("selection favours the exact model for exponential data") {
    GeneratorConfig cfg;
    cfg.phi_i_true = Exponential{1.0};
    cfg.phi_g_true = Exponential{1.0};
    cfg.n = 200;
    const ExposureModel em = cfg.exposure_model();
    const auto grid = parse_grid("0..1x0..1");
    int exact = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        cfg.seed = seed;
        const Selection sel = select_model(sample_dataset(cfg), em, grid);
        if (sel.best == std::pair{0, 0}) ++exact;
    }
    CHECK(exact > 10);
}

TEST_CASE("degree grid parsing") {
    const auto g = parse_grid("1..4x1..4");
    REQUIRE(g.size() == 16);
    CHECK(g.front() == std::pair{1, 1});
    CHECK(g[1] == std::pair{1, 2});
    CHECK(g.back() == std::pair{4, 4});
    CHECK(parse_grid("2x1") == std::vector<std::pair<int, int>>{{2, 1}});
    CHECK(parse_grid("0,2x3") == std::vector<std::pair<int, int>>{{0, 3}, {2, 3}});
    for (const char* bad : {"", "3", "1..x2", "4..1x1", "ax1", "1x-1", "1x61", "1..2x1..2x3", "1.5x1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_grid(bad), ValidationError);
    }
}
