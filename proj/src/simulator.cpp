#include "lagsieve/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <utility>

#include "lagsieve/errors.hpp"
#include "lagsieve/parallel.hpp"
#include "lagsieve/rng.hpp"

namespace lagsieve {

void GeneratorConfig::validate() const {
    if (n < 1) throw ValidationError("generator: n must be at least 1");
    if (p_c.empty()) throw ValidationError("generator: no location probabilities");
    double total = 0.0;
    for (const auto& [loc, p] : p_c) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValidationError("generator: probability of location " + std::to_string(loc) + " outside [0, 1]");
        }
        if (p > 0.0 && rates.count(loc) == 0) {
            throw ValidationError("generator: no growth rate for location " + std::to_string(loc));
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("generator: location probabilities must sum to 1");
    for (const auto& [loc, r] : rates) {
        if (!std::isfinite(r)) throw ValidationError("generator: non-finite growth rate");
    }
}

double sample_infection_time(double w, double r, double u) {
    if (r == 0.0) return u * w;
    // e^{-rw} + u (1 - e^{-rw}) = 1 + (1 - u) expm1(-rw)
    const double s = w + std::log1p((1.0 - u) * std::expm1(-r * w)) / r;
    return std::clamp(s, 0.0, w);
}

double infection_time_cdf(double s, double w, double r) {
    if (s <= 0.0) return 0.0;
    if (s >= w) return 1.0;
    if (r == 0.0) return s / w;
    // (e^{-r(w-s)} - e^{-rw}) / (1 - e^{-rw})
    const double denom = -std::expm1(-r * w);
    return std::clamp((std::expm1(-r * (w - s)) - std::expm1(-r * w)) / denom, 0.0, 1.0);
}

namespace {

int draw_location(const std::map<int, double>& p_c, double u) {
    double acc = 0.0;
    int last = p_c.begin()->first;
    for (const auto& [loc, p] : p_c) {
        if (p <= 0.0) continue;
        acc += p;
        last = loc;
        if (u < acc) return loc;
    }
    return last;
}

}  // namespace

std::vector<LatentRecord> sample_latent(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::vector<LatentRecord> out;
    out.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        LatentRecord rec;
        rec.w = cfg.w_dist.sample(rng);
        const int loc = draw_location(cfg.p_c, rng.uniform());
        rec.t1 = sample_infection_time(rec.w, cfg.rates.at(loc), rng.uniform());
        rec.i1 = cfg.phi_i_true.sample(rng);
        rec.i2 = cfg.phi_i_true.sample(rng);
        rec.g = cfg.phi_g_true.sample(rng);
        rec.obs.id = std::to_string(i + 1);
        rec.obs.s1 = rec.t1 + rec.i1;
        rec.obs.s2 = rec.t1 + rec.i2 + rec.g;
        rec.obs.w_tilde = std::min(rec.w, rec.obs.s1);
        rec.obs.location = loc;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<Observation> sample_dataset(const GeneratorConfig& cfg) {
    std::vector<Observation> out;
    for (LatentRecord& rec : sample_latent(cfg)) out.push_back(std::move(rec.obs));
    return out;
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("empirical_quantile: empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("empirical_quantile: p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

const ColumnSummary& StudyReport::summary(const std::string& name) const {
    for (const ColumnSummary& s : summaries)
        if (s.name == name) return s;
    throw ValidationError("study report has no column '" + name + "'");
}

namespace {

// Fit with retries on fresh substreams; returns the attempt count used.
std::pair<FitResult, std::size_t> fit_with_retries(std::span<const Observation> data, const ExposureModel& em, int m1,
                                                   int m2, std::uint64_t stream_seed, const MonteCarloOptions& opts) {
    FitOptions fo = opts.fit;
    for (std::size_t attempt = 0;; ++attempt) {
        fo.seed = derive_seed(stream_seed, 1 + attempt);
        try {
            return {fit(data, em, m1, m2, fo), attempt + 1};
        } catch (const NumericalError&) {
            if (attempt >= opts.retries) throw;
        }
    }
}

template <class Body>
void parallel_for(std::size_t n, int threads, Body body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t k = 0; k < n; ++k) body(k);
#else
    (void)threads;
    for (std::size_t k = 0; k < n; ++k) body(k);
#endif
}

}  // namespace

StudyRow run_replication(const GeneratorConfig& cfg, int m1, int m2, std::size_t replication, double growth_rate,
                         const LaguerreDensity& target_i, const LaguerreDensity& target_g,
                         const MonteCarloOptions& opts) {
    StudyRow row;
    row.replication = replication;
    row.seed = derive_seed(cfg.seed, replication);
    try {
        GeneratorConfig local = cfg;
        local.seed = derive_seed(row.seed, 0);
        const std::vector<Observation> data = sample_dataset(local);
        const auto [result, attempts] = fit_with_retries(data, cfg.exposure_model(), m1, m2, row.seed, opts);
        row.attempts = attempts;
        row.loglik = result.loglik;
        row.theta_i = result.phi_i_hat.theta();
        row.theta_g = result.phi_g_hat.theta();
        row.hellinger_sq_i = hellinger_sq(cfg.phi_i_true, result.phi_i_hat);
        row.hellinger_sq_g = hellinger_sq(cfg.phi_g_true, result.phi_g_hat);
        row.hellinger_sq_i_target = hellinger_sq(target_i, result.phi_i_hat);
        row.hellinger_sq_g_target = hellinger_sq(target_g, result.phi_g_hat);
        const FeatureReport features = feature_report(result, growth_rate, opts.probs);
        row.r0_hat = features.r0;
        row.presymptomatic_prob = features.presymptomatic_prob;
        row.quantiles_i = features.quantiles_i;
        row.quantiles_g = features.quantiles_g;
        row.ok = true;
    } catch (const NumericalError& e) {
        row.attempts = std::max<std::size_t>(row.attempts, opts.retries + 1);
        row.error = e.what();
    }
    return row;
}

namespace {

std::string prob_label(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p);
    return buf;
}

ColumnSummary summarize(std::string name, const std::vector<double>& values) {
    ColumnSummary s;
    s.name = std::move(name);
    s.count = values.size();
    if (values.empty()) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / static_cast<double>(values.size());
    for (double p : kSummaryLevels) s.quantiles[p] = empirical_quantile(values, p);
    return s;
}

}  // namespace

StudyReport run_study(const GeneratorConfig& cfg, int m1, int m2, std::size_t n_reps, double growth_rate,
                      const MonteCarloOptions& opts) {
    if (n_reps < 1) throw ValidationError("run_study: n_reps must be at least 1");
    cfg.validate();
    opts.fit.validate();
    for (double p : opts.probs) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("run_study: probabilities must lie in (0, 1)");
    }
    StudyReport report{cfg, m1, m2, growth_rate, opts, best_approx(cfg.phi_i_true, m1, opts.approx),
                       best_approx(cfg.phi_g_true, m2, opts.approx), reproduction_number(cfg.phi_g_true, growth_rate),
                       {}, 0, {}};
    report.rows.resize(n_reps);
    parallel_for(n_reps, resolve_threads(opts.threads), [&](std::size_t k) {
        report.rows[k] = run_replication(cfg, m1, m2, k, growth_rate, report.target_i, report.target_g, opts);
    });

    std::map<std::string, std::vector<double>> columns;
    const auto column = [&](const std::string& name, double v) { columns[name].push_back(v); };
    std::vector<std::string> order{"hellinger_sq_i",        "hellinger_sq_g", "hellinger_sq_i_target",
                                   "hellinger_sq_g_target", "r0_hat",         "presymptomatic_prob"};
    for (double p : opts.probs) {
        order.push_back("quantile_i_" + prob_label(p));
        order.push_back("quantile_g_" + prob_label(p));
    }
    for (const StudyRow& row : report.rows) {
        if (!row.ok) {
            ++report.failures;
            continue;
        }
        column("hellinger_sq_i", row.hellinger_sq_i);
        column("hellinger_sq_g", row.hellinger_sq_g);
        column("hellinger_sq_i_target", row.hellinger_sq_i_target);
        column("hellinger_sq_g_target", row.hellinger_sq_g_target);
        column("r0_hat", row.r0_hat);
        column("presymptomatic_prob", row.presymptomatic_prob);
        for (double p : opts.probs) {
            column("quantile_i_" + prob_label(p), row.quantiles_i.at(p));
            column("quantile_g_" + prob_label(p), row.quantiles_g.at(p));
        }
    }
    for (const std::string& name : order) report.summaries.push_back(summarize(name, columns[name]));
    return report;
}

double addone_p_value(std::size_t exceedances, std::size_t n) {
    return (1.0 + static_cast<double>(exceedances)) / (static_cast<double>(n) + 1.0);
}

BootstrapResult bootstrap_test(const FitResult& observed, const GenericDensity& h0_i, const GenericDensity& h0_g,
                               const GeneratorConfig& cfg, std::size_t n_sims, const MonteCarloOptions& opts) {
    if (n_sims < 1) throw ValidationError("bootstrap_test: n_sims must be at least 1");
    GeneratorConfig null_cfg = cfg;
    null_cfg.phi_i_true = h0_i;
    null_cfg.phi_g_true = h0_g;
    null_cfg.n = observed.n;
    null_cfg.validate();
    opts.fit.validate();

    const int m1 = observed.m1();
    const int m2 = observed.m2();
    BootstrapResult out;
    out.m1 = m1;
    out.m2 = m2;
    out.n_sims = n_sims;
    out.target_i = best_approx(h0_i, m1, opts.approx);
    out.target_g = best_approx(h0_g, m2, opts.approx);
    out.observed_i = hellinger_sq(observed.phi_i_hat, out.target_i);
    out.observed_g = hellinger_sq(observed.phi_g_hat, out.target_g);

    const ExposureModel em = null_cfg.exposure_model();
    std::vector<std::optional<std::pair<double, double>>> stats(n_sims);
    parallel_for(n_sims, resolve_threads(opts.threads), [&](std::size_t j) {
        const std::uint64_t sim_seed = derive_seed(null_cfg.seed, j);
        try {
            GeneratorConfig local = null_cfg;
            local.seed = derive_seed(sim_seed, 0);
            const std::vector<Observation> data = sample_dataset(local);
            const FitResult sim = fit_with_retries(data, em, m1, m2, sim_seed, opts).first;
            stats[j] = std::make_pair(hellinger_sq(sim.phi_i_hat, out.target_i),
                                      hellinger_sq(sim.phi_g_hat, out.target_g));
        } catch (const NumericalError&) {
        }
    });

    std::size_t ge_i = 0, ge_g = 0, ge_joint = 0;
    for (const auto& s : stats) {
        if (!s) {
            ++out.failures;
            continue;
        }
        out.sim_i.push_back(s->first);
        out.sim_g.push_back(s->second);
        const bool ei = s->first >= out.observed_i;
        const bool eg = s->second >= out.observed_g;
        ge_i += ei;
        ge_g += eg;
        ge_joint += ei && eg;
    }
    const std::size_t ok = out.sim_i.size();
    if (ok > 0) {
        out.exceed_i = static_cast<double>(ge_i) / static_cast<double>(ok);
        out.exceed_g = static_cast<double>(ge_g) / static_cast<double>(ok);
        out.exceed_joint = static_cast<double>(ge_joint) / static_cast<double>(ok);
    }
    out.p_i = addone_p_value(ge_i, ok);
    out.p_g = addone_p_value(ge_g, ok);
    out.p_joint = addone_p_value(ge_joint, ok);
    return out;
}

BootstrapResult bootstrap_test(std::span<const Observation> data, const ExposureModel& em,
                               const GenericDensity& h0_i, const GenericDensity& h0_g, int m1, int m2,
                               const GeneratorConfig& cfg, std::size_t n_sims, const MonteCarloOptions& opts) {
    FitOptions fo = opts.fit;
    fo.seed = derive_seed(cfg.seed, n_sims);
    const FitResult observed = fit(data, em, m1, m2, fo);
    return bootstrap_test(observed, h0_i, h0_g, cfg, n_sims, opts);
}

ImputationResult impute_windows(std::span<const RawRecord> raw, double lookback) {
    if (!(lookback > 0.0) || !std::isfinite(lookback)) throw ValidationError("impute_windows: lookback must be positive");
    ImputationResult out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const RawRecord& r = raw[i];
        const auto reject = [&](const std::string& why) { out.errors.push_back({i, r.id, why}); };
        const auto finite_or_absent = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
        if (!std::isfinite(r.s1) || !std::isfinite(r.s2) || !finite_or_absent(r.window_start) ||
            !finite_or_absent(r.window_end) || !finite_or_absent(r.second_window_end)) {
            reject("non-finite time");
            continue;
        }
        const double start = r.window_start.value_or(r.s1 - lookback);
        double end = std::min(r.s1, r.s2);
        if (r.window_end) end = std::min(end, *r.window_end);
        if (r.second_window_end) end = std::min(end, *r.second_window_end);
        if (r.s1 < start) {
            reject("infector onset precedes the exposure window");
            continue;
        }
        if (r.s2 < start) {
            reject("infectee onset precedes the exposure window");
            continue;
        }
        if (end < start) {
            reject("exposure window ends before it starts");
            continue;
        }
        Observation o;
        o.id = r.id;
        o.s1 = r.s1 - start;
        o.s2 = r.s2 - start;
        o.w_tilde = std::min(end - start, o.s1);
        o.location = r.location;
        out.observations.push_back(std::move(o));
    }
    return out;
}

}  // namespace lagsieve
