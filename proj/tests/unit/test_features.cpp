#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "lagsieve/distances.hpp"
#include "lagsieve/errors.hpp"
#include "lagsieve/features.hpp"
#include "lagsieve/simulator.hpp"
#include "oracles.hpp"

using namespace lagsieve;
using doctest::Approx;

namespace {

const double kGrowth = std::numbers::ln2 / 5.0;

double weibull_pdf(double x, double k, double lambda) {
    if (!(x > 0.0)) return 0.0;
    return k / lambda * std::pow(x / lambda, k - 1.0) * std::exp(-std::pow(x / lambda, k));
}

// 1 / integral e^{-r t} f(t) dt by the reference Simpson rule.
double r0_oracle(const std::function<double(double)>& f, double r, double upper) {
    return 1.0 / oracle::simpson([&](double t) { return std::exp(-r * t) * f(t); }, 0.0, upper, 1e-14, 64);
}

FitResult fit_with(const LaguerreDensity& i, const LaguerreDensity& g) {
    FitResult f;
    f.phi_i_hat = i;
    f.phi_g_hat = g;
    return f;
}

}  // namespace

TEST_CASE("reproduction number examples") {
    std::mt19937_64 gen(9);
    for (int m = 0; m <= 8; ++m) {
        const LaguerreDensity d(oracle::random_unit(gen, m));
        CHECK(std::abs(reproduction_number(d, 0.0) - 1.0) < 1e-10);
    }
    const LaguerreDensity e;
    for (double r : {-0.5, 0.0, 0.1, kGrowth, 2.0}) CHECK(reproduction_number(e, r) == Approx(1.0 + r).epsilon(1e-13));

    const LaguerreDensity approx = best_approx(Weibull{2.826, 5.665}, 2);
    const double expected = r0_oracle([&](double t) { return oracle::laguerre_pdf(approx.theta(), t); }, kGrowth, 120.0);
    CHECK(std::abs(reproduction_number(approx, kGrowth) - expected) < 1e-6);

    CHECK_THROWS_AS(reproduction_number(e, -1.0), DivergentIntegralError);
    CHECK_THROWS_AS(reproduction_number(e, -3.0), DivergentIntegralError);
}

TEST_CASE("reproduction number of parametric densities") {
    const GenericDensity wb = Weibull{2.826, 5.665};
    const double expected = r0_oracle([](double t) { return weibull_pdf(t, 2.826, 5.665); }, kGrowth, 40.0);
    CHECK(reproduction_number(wb, kGrowth) == Approx(expected).epsilon(1e-9));
    CHECK(reproduction_number(GenericDensity(Exponential{0.5}), 0.3) == Approx(1.6).epsilon(1e-9));
    CHECK(reproduction_number(wb, 0.0) == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("reproduction number increases with the growth rate") {
    std::mt19937_64 gen(4);
    for (int rep = 0; rep < 5; ++rep) {
        const LaguerreDensity d(oracle::random_unit(gen, 3));
        double prev = 0.0;
        for (double r : {-0.6, -0.2, 0.0, 0.05, 0.2, 0.7, 3.0}) {
            const double v = reproduction_number(d, r);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("plug-in R0 of finer approximations approaches the true value") {
    const GenericDensity wb = Weibull{2.826, 5.665};
    const double truth = r0_oracle([](double t) { return weibull_pdf(t, 2.826, 5.665); }, kGrowth, 40.0);
    CHECK(truth == Approx(1.943245637438388).epsilon(1e-12));

    // Reference values from 30-digit arithmetic. The error is not monotone
    // in m (odd/even oscillation, and m = 4 happens to land very close),
    // but it shrinks along m = 2, 6, 10.
    const std::map<int, double> reference{{2, 1.937928321431983}, {4, 1.943170210506725},
                                          {6, 1.942548886433022}, {10, 1.943215252025509}};
    for (auto [m, value] : reference) {
        CAPTURE(m);
        CHECK(reproduction_number(best_approx(wb, m), kGrowth) == Approx(value).epsilon(1e-9));
    }
    double prev = INFINITY;
    for (int m : {2, 6, 10}) {
        const double err = std::abs(reproduction_number(best_approx(wb, m), kGrowth) - truth);
        CAPTURE(m);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("pre-symptomatic probability of identical laws is one half") {
    const LaguerreDensity e;
    CHECK(presymptomatic_prob(e, e) == Approx(0.5).epsilon(1e-12));
    std::mt19937_64 gen(12);
    for (int rep = 0; rep < 10; ++rep) {
        const LaguerreDensity d(oracle::random_unit(gen, rep % 6));
        CHECK(std::abs(presymptomatic_prob(d, d) - 0.5) < 1e-6);
    }
}

TEST_CASE("pre-symptomatic probability against Monte Carlo") {
    const GeneratorConfig cfg;
    const LaguerreDensity phi_i = best_approx(cfg.phi_i_true, 2);
    const LaguerreDensity phi_g = best_approx(cfg.phi_g_true, 2);
    const double value = presymptomatic_prob(phi_i, phi_g);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);

    // Importance sampling from Exp(mean 6) proposals for both variables.
    const double rate = 1.0 / 6.0;
    std::mt19937_64 gen(77);
    std::exponential_distribution<double> prop(rate);
    const std::size_t n = 10'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double i = prop(gen), g = prop(gen);
        double v = 0.0;
        if (g <= i) v = phi_i.pdf(i) * phi_g.pdf(g) / (rate * rate * std::exp(-rate * (i + g)));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
    CHECK(std::abs(value - mean) < 3.0 * se);
    CHECK(se < 1e-3);
}

TEST_CASE("pre-symptomatic probability orders shifted laws") {
    // Exp(1) against a density with more mass far out: G is rarely shorter.
    const LaguerreDensity e;
    const LaguerreDensity late = LaguerreDensity::from_coefficients({1.0, -1.0, 0.5});
    CHECK(presymptomatic_prob(late, e) > 0.5);
    CHECK(presymptomatic_prob(e, late) < 0.5);
    CHECK(presymptomatic_prob(late, e) + presymptomatic_prob(e, late) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("feature report") {
    const FitResult exp_fit = fit_with(LaguerreDensity(), LaguerreDensity());
    const std::vector<double> half{0.5};
    const FeatureReport r = feature_report(exp_fit, 0.0, half);
    CHECK(r.r0 == Approx(1.0).epsilon(1e-12));
    CHECK(r.growth_rate_used == 0.0);
    REQUIRE(r.quantiles_i.size() == 1);
    CHECK(r.quantiles_i.at(0.5) == Approx(std::numbers::ln2).epsilon(1e-10));
    CHECK(r.quantiles_g.at(0.5) == Approx(std::numbers::ln2).epsilon(1e-10));
    CHECK(r.presymptomatic_prob == Approx(0.5).epsilon(1e-12));

    const FeatureReport d = feature_report(exp_fit, kGrowth);
    CHECK(d.quantiles_g.size() == kDefaultFeatureProbs.size());
    double prev = 0.0;
    for (auto [p, q] : d.quantiles_g) {
        CHECK(q == Approx(-std::log1p(-p)).epsilon(1e-10));
        CHECK(q > prev);
        prev = q;
    }

    for (std::vector<double> bad : {std::vector<double>{0.0}, {0.5, 1.0}, {-0.1}, {NAN}}) {
        CHECK_THROWS_AS(feature_report(exp_fit, 0.1, bad), ValidationError);
    }
    CHECK_THROWS_AS(feature_report(exp_fit, -1.5), DivergentIntegralError);
}

TEST_CASE("feature report of a fitted replication") {
    GeneratorConfig cfg;
    cfg.seed = 21;
    const auto data = sample_dataset(cfg);
    const FitResult f = fit(data, cfg.exposure_model(), 2, 2);
    const std::vector<double> probs{0.1, 0.3, 0.5, 0.7, 0.9, 0.99};
    const FeatureReport r = feature_report(f, kGrowth, probs);
    CHECK(std::isfinite(r.r0));
    CHECK(r.r0 > 1.0);
    CHECK(r.r0 < 4.0);
    CHECK(r.presymptomatic_prob >= 0.0);
    CHECK(r.presymptomatic_prob <= 1.0);
    for (const auto* qs : {&r.quantiles_i, &r.quantiles_g}) {
        double prev = 0.0;
        for (auto [p, q] : *qs) {
            CHECK(q >= prev);
            prev = q;
        }
    }
}
