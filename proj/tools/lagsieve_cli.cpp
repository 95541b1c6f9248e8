// Command-line front end: each subcommand reads its inputs, calls one
// library operation and writes the result.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "lagsieve/distances.hpp"
#include "lagsieve/errors.hpp"
#include "lagsieve/estimator.hpp"
#include "lagsieve/features.hpp"
#include "lagsieve/io.hpp"
#include "lagsieve/simulator.hpp"

namespace fs = std::filesystem;
using namespace lagsieve;

namespace {

struct FitFlags {
    std::size_t starts = 5;
    std::size_t max_iters = 2000;
    double simplex_tol = 1e-8;
    std::size_t nodes = 64;
    bool bic_coefficients = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--starts", starts, "Random starts per fit")->capture_default_str();
        cmd->add_option("--max-iters", max_iters, "Nelder-Mead iterations per run")->capture_default_str();
        cmd->add_option("--simplex-tol", simplex_tol, "Nelder-Mead relative value tolerance")->capture_default_str();
        cmd->add_option("--nodes", nodes, "Gauss-Legendre nodes per likelihood axis")->capture_default_str();
        cmd->add_flag("--bic-coefficients", bic_coefficients, "Count m1+m2+2 parameters in BIC");
    }

    FitOptions options(std::uint64_t seed) const {
        FitOptions o;
        o.n_starts = starts;
        o.max_iters = max_iters;
        o.simplex_tol = simplex_tol;
        o.seed = seed;
        o.bic_counts_coefficients = bic_coefficients;
        o.quadrature.nodes_t = nodes;
        o.quadrature.nodes_y = nodes;
        return o;
    }
};

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("bad number '" + item + "' in list '" + s + "'");
        }
    }
    return out;
}

void emit_json(const Json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json(out, j);
    }
}

std::vector<Observation> load_data(const std::string& path, const std::string& errors_path, double lookback) {
    IngestResult r = ingest_csv(path, lookback);
    if (!r.errors.empty()) {
        const std::string sidecar = errors_path.empty() ? path + ".errors.csv" : errors_path;
        write_errors_csv(sidecar, r.errors);
        std::cerr << r.errors.size() << " record(s) rejected; see " << sidecar << '\n';
    }
    if (r.observations.empty()) throw ValidationError("no usable records in '" + path + "'");
    return std::move(r.observations);
}

ExposureModel load_model(const std::string& path) {
    if (!path.empty()) return load_exposure_model(path);
    return GeneratorConfig{}.exposure_model();
}

GeneratorConfig load_config(const std::string& path) {
    return path.empty() ? GeneratorConfig{} : load_generator_config(path);
}

void print_fit(const FitResult& f) {
    std::printf("m1=%d m2=%d n=%zu loglik=%.10g bic=%.10g\n", f.m1(), f.m2(), f.n, f.loglik, f.bic);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sieve maximum-likelihood estimation of incubation-period and generation-time densities"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: LAGSIEVE_THREADS or all cores)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw a synthetic dataset");
    std::string sim_config, sim_out;
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 1;
    sim->add_option("--config", sim_config, "Generator config file");
    sim->add_option("--n", sim_n, "Sample size (overrides the config)");
    sim->add_option("--seed", sim_seed, "Seed")->capture_default_str();
    sim->add_option("--out", sim_out, "Output CSV (stdout if omitted)");

    // fit
    auto* fitc = app.add_subcommand("fit", "Fit Laguerre densities of fixed degrees");
    std::string fit_data, fit_model, fit_out, fit_errors;
    int fit_m1 = 2, fit_m2 = 2;
    std::uint64_t fit_seed = 1;
    double lookback = 60.0;
    FitFlags fit_flags;
    fitc->add_option("--data", fit_data, "Dataset or raw CSV")->required();
    fitc->add_option("--model", fit_model, "Exposure model config (location.<c>.rate keys)");
    fitc->add_option("--m1", fit_m1, "Incubation degree")->capture_default_str();
    fitc->add_option("--m2", fit_m2, "Generation degree")->capture_default_str();
    fitc->add_option("--seed", fit_seed, "Seed")->capture_default_str();
    fitc->add_option("--out", fit_out, "Output JSON (stdout if omitted)");
    fitc->add_option("--errors", fit_errors, "Rejected-record report");
    fitc->add_option("--lookback", lookback, "Days before onset assumed for missing window starts")
        ->capture_default_str();
    fit_flags.add(fitc);

    // select
    auto* sel = app.add_subcommand("select", "BIC model selection over a degree grid");
    std::string sel_data, sel_model, sel_out, sel_grid = "1..4x1..4", sel_errors, sel_json;
    std::uint64_t sel_seed = 1;
    FitFlags sel_flags;
    sel->add_option("--data", sel_data, "Dataset or raw CSV")->required();
    sel->add_option("--model", sel_model, "Exposure model config");
    sel->add_option("--grid", sel_grid, "Degree grid, e.g. 1..4x1..4")->capture_default_str();
    sel->add_option("--seed", sel_seed, "Seed")->capture_default_str();
    sel->add_option("--out", sel_out, "BIC table CSV (stdout if omitted)");
    sel->add_option("--json", sel_json, "Also write the selection as JSON");
    sel->add_option("--errors", sel_errors, "Rejected-record report");
    sel->add_option("--lookback", lookback, "Days before onset assumed for missing window starts")
        ->capture_default_str();
    sel_flags.add(sel);

    // features
    auto* feat = app.add_subcommand("features", "Plug-in features of a fit");
    std::string feat_fit, feat_out, feat_probs = "0.3,0.5,0.7,0.9";
    double feat_rate = 0.0;
    feat->add_option("--fit", feat_fit, "Fit JSON")->required();
    feat->add_option("--growth-rate", feat_rate, "Exponential growth rate per day")->capture_default_str();
    feat->add_option("--probs", feat_probs, "Quantile levels")->capture_default_str();
    feat->add_option("--out", feat_out, "Output JSON");

    // study
    auto* study = app.add_subcommand("study", "Monte-Carlo simulation study");
    std::string study_config, study_out;
    int study_m1 = 2, study_m2 = 2;
    std::size_t study_reps = 100, study_n = 0, study_retries = 2;
    std::uint64_t study_seed = 1;
    double study_rate = std::numbers::ln2 / 5.0;
    FitFlags study_flags;
    study->add_option("--config", study_config, "Generator config file");
    study->add_option("--m1", study_m1)->capture_default_str();
    study->add_option("--m2", study_m2)->capture_default_str();
    study->add_option("--reps", study_reps, "Replications")->capture_default_str();
    study->add_option("--n", study_n, "Sample size (overrides the config)");
    study->add_option("--seed", study_seed, "Seed")->capture_default_str();
    study->add_option("--growth-rate", study_rate, "Growth rate for R0")->capture_default_str();
    study->add_option("--retries", study_retries, "Extra fits after a failure")->capture_default_str();
    study->add_option("--out", study_out, "Output directory")->required();
    study_flags.add(study);

    // test
    auto* test = app.add_subcommand("test", "Parametric bootstrap goodness-of-fit test");
    std::string test_fit, test_h0i, test_h0g, test_config, test_out;
    std::size_t test_sims = 100, test_retries = 2;
    std::uint64_t test_seed = 1;
    FitFlags test_flags;
    test->add_option("--fit", test_fit, "Fit JSON of the observed data")->required();
    test->add_option("--h0-i", test_h0i, "Hypothesized incubation density")->required();
    test->add_option("--h0-g", test_h0g, "Hypothesized generation density")->required();
    test->add_option("--sims", test_sims, "Bootstrap simulations")->capture_default_str();
    test->add_option("--config", test_config, "Generator config for the simulated data");
    test->add_option("--seed", test_seed, "Seed")->capture_default_str();
    test->add_option("--retries", test_retries, "Extra fits after a failure")->capture_default_str();
    test->add_option("--out", test_out, "Output JSON");
    test_flags.add(test);

    // approx
    auto* approx = app.add_subcommand("approx", "Best Laguerre approximation of a density");
    std::string approx_density, approx_out;
    int approx_m = 2;
    bool approx_refine = false;
    approx->add_option("--density", approx_density, "Descriptor, e.g. weibull:2.826,5.665")->required();
    approx->add_option("--m", approx_m, "Degree")->capture_default_str();
    approx->add_flag("--refine", approx_refine, "Minimize the Hellinger distance directly");
    approx->add_option("--out", approx_out, "Output JSON");

    // curve
    auto* curve = app.add_subcommand("curve", "Density and CDF on a grid");
    std::string curve_theta, curve_range = "0:20:0.05", curve_out;
    curve->add_option("--theta", curve_theta, "Laguerre density JSON")->required();
    curve->add_option("--range", curve_range, "start:stop:step")->capture_default_str();
    curve->add_option("--out", curve_out, "Output CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*sim) {
            GeneratorConfig cfg = load_config(sim_config);
            if (sim_n) cfg.n = sim_n;
            cfg.seed = sim_seed;
            const std::vector<Observation> data = sample_dataset(cfg);
            if (sim_out.empty()) {
                write_dataset_csv(std::cout, data);
            } else {
                write_dataset_csv(sim_out, data);
                write_json(sim_out + ".meta.json", Json{{"version", kVersion}, {"config", to_json(cfg)}});
            }
        } else if (*fitc) {
            const ExposureModel em = load_model(fit_model);
            const std::vector<Observation> data = load_data(fit_data, fit_errors, lookback);
            const FitResult f = fit(data, em, fit_m1, fit_m2, fit_flags.options(fit_seed));
            print_fit(f);
            Json j = to_json(f, em);
            j["data"] = fit_data;
            emit_json(j, fit_out);
        } else if (*sel) {
            const ExposureModel em = load_model(sel_model);
            const std::vector<Observation> data = load_data(sel_data, sel_errors, lookback);
            const auto grid = parse_grid(sel_grid);
            const Selection s = select_model(data, em, grid, sel_flags.options(sel_seed));
            std::ostringstream table;
            write_selection_csv(table, s);
            if (sel_out.empty()) {
                std::cout << table.str();
            } else {
                std::ofstream(sel_out, std::ios::binary) << table.str();
                write_json(sel_out + ".meta.json", Json{{"version", kVersion},
                                                        {"seed", sel_seed},
                                                        {"grid", sel_grid},
                                                        {"exposure_rates", to_json(em)},
                                                        {"options", to_json(sel_flags.options(sel_seed))}});
            }
            if (!sel_json.empty()) {
                Json j = to_json(s);
                j["seed"] = sel_seed;
                j["exposure_rates"] = to_json(em);
                write_json(sel_json, j);
            }
            std::printf("chosen m1=%d m2=%d\n", s.best.first, s.best.second);
        } else if (*feat) {
            const FitResult f = read_fit_json(feat_fit);
            const std::vector<double> probs = parse_list(feat_probs);
            const FeatureReport r = feature_report(f, feat_rate, probs);
            std::printf("r0=%.10g\n", r.r0);
            std::printf("growth_rate=%.10g\n", r.growth_rate_used);
            std::printf("presymptomatic_prob=%.10g\n", r.presymptomatic_prob);
            std::printf("%-8s %-14s %-14s\n", "p", "incubation", "generation");
            for (const auto& [p, q] : r.quantiles_i) std::printf("%-8g %-14.8g %-14.8g\n", p, q, r.quantiles_g.at(p));
            if (!feat_out.empty()) {
                Json j = to_json(r);
                j["version"] = kVersion;
                j["fit"] = feat_fit;
                j["seed"] = f.options.seed;
                write_json(feat_out, j);
            }
        } else if (*study) {
            GeneratorConfig cfg = load_config(study_config);
            if (study_n) cfg.n = study_n;
            cfg.seed = study_seed;
            MonteCarloOptions mc;
            mc.fit = study_flags.options(study_seed);
            mc.retries = study_retries;
            mc.threads = threads;
            const StudyReport r = run_study(cfg, study_m1, study_m2, study_reps, study_rate, mc);
            fs::create_directories(study_out);
            write_json((fs::path(study_out) / "study.json").string(), to_json(r));
            std::ofstream csv(fs::path(study_out) / "study.csv", std::ios::binary);
            write_study_csv(csv, r);
            const ColumnSummary& hg = r.summary("hellinger_sq_g");
            const ColumnSummary& hi = r.summary("hellinger_sq_i");
            std::printf("replications=%zu failures=%zu\n", r.rows.size(), r.failures);
            if (hi.count) std::printf("median hellinger_sq_i=%.6g\n", hi.quantiles.at(0.5));
            if (hg.count) std::printf("median hellinger_sq_g=%.6g\n", hg.quantiles.at(0.5));
            std::printf("mean r0_hat=%.6g r0_true=%.6g\n", r.summary("r0_hat").mean, r.r0_true);
        } else if (*test) {
            const FitResult f = read_fit_json(test_fit);
            if (f.n < 1) throw ValidationError("fit JSON does not record the sample size n");
            GeneratorConfig cfg = load_config(test_config);
            cfg.seed = test_seed;
            MonteCarloOptions mc;
            mc.fit = test_flags.options(test_seed);
            mc.retries = test_retries;
            mc.threads = threads;
            const BootstrapResult r = bootstrap_test(f, GenericDensity::parse(test_h0i), GenericDensity::parse(test_h0g),
                                                     cfg, test_sims, mc);
            std::printf("observed_i=%.6g observed_g=%.6g\n", r.observed_i, r.observed_g);
            std::printf("p_i=%.4g p_g=%.4g p_joint=%.4g (failures %zu)\n", r.p_i, r.p_g, r.p_joint, r.failures);
            Json j = to_json(r);
            j["seed"] = test_seed;
            j["config"] = to_json(cfg);
            j["h0_i"] = test_h0i;
            j["h0_g"] = test_h0g;
            if (!test_out.empty()) write_json(test_out, j);
        } else if (*approx) {
            ApproximationOptions ao;
            ao.refine = approx_refine;
            const GenericDensity target = GenericDensity::parse(approx_density);
            const Approximation a = best_approx_report(target, approx_m, ao);
            Json j = to_json(a.best());
            j["density"] = approx_density;
            j["hellinger_sq"] = a.refined ? std::min(a.hellinger_projection, *a.hellinger_refined)
                                          : a.hellinger_projection;
            j["hellinger_sq_projection"] = a.hellinger_projection;
            j["version"] = kVersion;
            emit_json(j, approx_out);
        } else if (*curve) {
            const LaguerreDensity d = read_laguerre_json(curve_theta);
            const std::vector<double> r = [&] {
                std::string s = curve_range;
                std::replace(s.begin(), s.end(), ':', ',');
                return parse_list(s);
            }();
            if (r.size() != 3 || !(r[2] > 0.0) || !(r[1] >= r[0])) {
                throw ValidationError("--range must be start:stop:step with step > 0 and stop >= start");
            }
            const auto steps = static_cast<std::size_t>(std::floor((r[1] - r[0]) / r[2] + 1e-9));
            std::ostringstream os;
            os << "x,density,cdf\n";
            for (std::size_t i = 0; i <= steps; ++i) {
                const double x = r[0] + static_cast<double>(i) * r[2];
                os << format_number(x) << ',' << format_number(d.pdf(x)) << ',' << format_number(d.cdf(x)) << '\n';
            }
            if (curve_out.empty()) {
                std::cout << os.str();
            } else {
                std::ofstream(curve_out, std::ios::binary) << os.str();
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
