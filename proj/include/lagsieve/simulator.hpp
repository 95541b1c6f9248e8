#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagsieve/densities.hpp"
#include "lagsieve/distances.hpp"
#include "lagsieve/estimator.hpp"
#include "lagsieve/features.hpp"
#include "lagsieve/transmission.hpp"

namespace lagsieve {

/// Data-generating process for synthetic transmission pairs. The defaults
/// describe a fictional pandemic that doubles every five days in one of two
/// locations.
struct GeneratorConfig {
    GenericDensity w_dist = Exponential{0.3820225};
    std::map<int, double> p_c{{0, 0.65}, {1, 0.35}};
    std::map<int, double> rates{{0, 0.0}, {1, std::numbers::ln2 / 5.0}};
    GenericDensity phi_i_true = LogNormal{1.644, 0.363};
    GenericDensity phi_g_true = Weibull{2.826, 5.665};
    std::size_t n = 40;
    std::uint64_t seed = 1;

    /// p_c sums to 1 within 1e-12, every location with positive
    /// probability has a rate, n >= 1.
    void validate() const;
    ExposureModel exposure_model() const { return ExposureModel(rates); }
};

/// A generated record together with the latent quantities behind it.
struct LatentRecord {
    Observation obs;
    double w = 0.0;
    double t1 = 0.0;
    double i1 = 0.0;
    double i2 = 0.0;
    double g = 0.0;
};

/// Infection time within [0, w] for kernel e^{-r(w - t)}, from a uniform u
/// in (0, 1): uniform when r = 0, otherwise the inverse of
/// (e^{-r(w-s)} - e^{-rw}) / (1 - e^{-rw}).
double sample_infection_time(double w, double r, double u);

/// Distribution function inverted by sample_infection_time.
double infection_time_cdf(double s, double w, double r);

/// Draws cfg.n records from cfg.seed. Per record, in this order: W, C, T1,
/// I1, I2, G, each from one uniform by inversion. Bit-reproducible.
std::vector<LatentRecord> sample_latent(const GeneratorConfig& cfg);

std::vector<Observation> sample_dataset(const GeneratorConfig& cfg);

/// Study and bootstrap settings shared by the Monte-Carlo harnesses.
struct MonteCarloOptions {
    FitOptions fit;
    std::size_t retries = 2;  // extra fits with fresh seeds after a failure
    std::vector<double> probs = kDefaultFeatureProbs;
    ApproximationOptions approx;
    int threads = 0;  // see resolve_threads
};

struct StudyRow {
    std::size_t replication = 0;
    std::uint64_t seed = 0;  // replication substream
    bool ok = false;
    std::string error;
    std::size_t attempts = 0;
    double loglik = 0.0;
    double hellinger_sq_i = 0.0;         // against the true incubation density
    double hellinger_sq_g = 0.0;         // against the true generation density
    double hellinger_sq_i_target = 0.0;  // against its best Laguerre approximation
    double hellinger_sq_g_target = 0.0;
    double r0_hat = 0.0;
    double presymptomatic_prob = 0.0;
    std::map<double, double> quantiles_i;
    std::map<double, double> quantiles_g;
    std::vector<double> theta_i;
    std::vector<double> theta_g;
};

/// Empirical distribution of one study column over successful replications.
struct ColumnSummary {
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    std::map<double, double> quantiles;  // at kSummaryLevels
};

inline const std::vector<double> kSummaryLevels{0.1, 0.25, 0.5, 0.75, 0.9};

struct StudyReport {
    GeneratorConfig config;
    int m1 = 0;
    int m2 = 0;
    double growth_rate = 0.0;
    MonteCarloOptions options;
    LaguerreDensity target_i;  // best approximations of the truths
    LaguerreDensity target_g;
    double r0_true = 0.0;  // Euler-Lotka value of the true generation density
    std::vector<StudyRow> rows;
    std::size_t failures = 0;
    std::vector<ColumnSummary> summaries;

    const ColumnSummary& summary(const std::string& name) const;
};

/// Linear-interpolation empirical quantile of an unsorted sample.
double empirical_quantile(std::vector<double> values, double p);

/// Replication k uses substream k of cfg.seed: its dataset is drawn from
/// substream 0 of that and fit attempt a from substream 1 + a. Fit failures
/// are recorded per row and excluded from the summaries.
StudyReport run_study(const GeneratorConfig& cfg, int m1, int m2, std::size_t n_reps, double growth_rate,
                      const MonteCarloOptions& opts = {});

/// One replication of run_study, exposed so a single pipeline run can be
/// reproduced in isolation.
StudyRow run_replication(const GeneratorConfig& cfg, int m1, int m2, std::size_t replication, double growth_rate,
                         const LaguerreDensity& target_i, const LaguerreDensity& target_g,
                         const MonteCarloOptions& opts);

struct BootstrapResult {
    int m1 = 0;
    int m2 = 0;
    double observed_i = 0.0;  // squared Hellinger distance to the H0 target
    double observed_g = 0.0;
    LaguerreDensity target_i;
    LaguerreDensity target_g;
    std::vector<double> sim_i;  // successful simulations only, by index
    std::vector<double> sim_g;
    std::size_t n_sims = 0;
    std::size_t failures = 0;
    double exceed_i = 0.0;  // fraction of simulations at least as extreme
    double exceed_g = 0.0;
    double exceed_joint = 0.0;
    double p_i = 1.0;  // (1 + #{sim >= observed}) / (N + 1)
    double p_g = 1.0;
    double p_joint = 1.0;
};

/// Add-one Monte-Carlo p-value.
double addone_p_value(std::size_t exceedances, std::size_t n);

/// Parametric bootstrap goodness-of-fit test of H0: (phi_I, phi_G) =
/// (h0_i, h0_g). The statistics are squared Hellinger distances between
/// the fitted densities and the best Laguerre approximations of h0 of the
/// fitted degrees. Simulated datasets have observed.n records and are
/// otherwise drawn from cfg with the truths replaced by h0; simulation j
/// uses substream j of cfg.seed.
BootstrapResult bootstrap_test(const FitResult& observed, const GenericDensity& h0_i, const GenericDensity& h0_g,
                               const GeneratorConfig& cfg, std::size_t n_sims, const MonteCarloOptions& opts = {});

/// Fits (m1, m2) to `data` first, then runs the test above.
BootstrapResult bootstrap_test(std::span<const Observation> data, const ExposureModel& em,
                               const GenericDensity& h0_i, const GenericDensity& h0_g, int m1, int m2,
                               const GeneratorConfig& cfg, std::size_t n_sims, const MonteCarloOptions& opts = {});

/// A transmission pair as reported, in absolute time, with optional
/// exposure-window bounds.
struct RawRecord {
    std::string id;
    double s1 = 0.0;
    double s2 = 0.0;
    std::optional<double> window_start;
    std::optional<double> window_end;
    std::optional<double> second_window_end;  // infectee's exposure window end
    int location = 0;
};

struct RecordError {
    std::size_t index = 0;  // position in the input (or line number for files)
    std::string id;
    std::string reason;
};

struct ImputationResult {
    std::vector<Observation> observations;
    std::vector<RecordError> errors;
};

/// Turns raw records into observations with the window start as time
/// origin. A missing start becomes s1 - lookback; the window end is the
/// smallest of the reported end, s1, s2 and the reported second window end.
/// Records that cannot be normalized are listed in `errors`.
ImputationResult impute_windows(std::span<const RawRecord> raw, double lookback = 60.0);

}  // namespace lagsieve
