#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagsieve/estimator.hpp"
#include "lagsieve/features.hpp"
#include "lagsieve/laguerre.hpp"
#include "lagsieve/simulator.hpp"
#include "lagsieve/transmission.hpp"

namespace lagsieve {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Dataset CSV: header `id,s1,s2,w_tilde,location`. Numbers are written with
// 17 significant digits so a write/read cycle is lossless.
void write_dataset_csv(std::ostream& os, std::span<const Observation> data);
void write_dataset_csv(const std::string& path, std::span<const Observation> data);

/// Observations and per-line problems from a CSV file. Lines are counted
/// from 1 with the header on line 1.
struct IngestResult {
    std::vector<Observation> observations;
    std::vector<RecordError> errors;
};

/// Reads either the dataset format or the raw format
/// `id,s1,s2,window_start,window_end,second_window_end,location` (empty
/// window fields allowed), chosen from the header. Raw records go through
/// impute_windows. Bad lines are reported, not thrown; a missing or
/// unrecognized header throws ValidationError.
IngestResult ingest_csv(std::istream& is, double lookback = 60.0);
IngestResult ingest_csv(const std::string& path, double lookback = 60.0);

/// Strict variant: throws ValidationError on the first bad line.
std::vector<Observation> read_dataset_csv(const std::string& path);

void write_errors_csv(const std::string& path, std::span<const RecordError> errors);

// Key-value config: one `key = value` per line, `#` starts a comment.
// Keys: location.<c>.rate, location.<c>.prob, window, incubation,
// generation (density descriptors), n, seed.
std::map<std::string, std::string> parse_key_values(std::istream& is);

/// Starts from the defaults; locations named in the file replace the
/// default location tables as a whole.
GeneratorConfig generator_config_from(const std::map<std::string, std::string>& kv);
GeneratorConfig load_generator_config(const std::string& path);

/// Only location.<c>.rate keys are used; other known keys are ignored.
ExposureModel exposure_model_from(const std::map<std::string, std::string>& kv);
ExposureModel load_exposure_model(const std::string& path);

// JSON documents.
Json to_json(const LaguerreDensity& d);
LaguerreDensity laguerre_from_json(const Json& j);
LaguerreDensity read_laguerre_json(const std::string& path);

Json to_json(const QuadratureConfig& q);
Json to_json(const FitOptions& o);
Json to_json(const ExposureModel& em);
Json to_json(const GeneratorConfig& cfg);

/// Includes the options echo, seed, exposure rates and tool version.
Json to_json(const FitResult& fit, const ExposureModel& em);
/// Reads back the fields written by to_json(FitResult, ...). Per-start
/// diagnostics and options are restored when present.
FitResult fit_from_json(const Json& j);
FitResult read_fit_json(const std::string& path);

Json to_json(const FeatureReport& r);
Json to_json(const Selection& s);
Json to_json(const StudyReport& r);
Json to_json(const BootstrapResult& r);

/// One row per replication.
void write_study_csv(std::ostream& os, const StudyReport& r);
/// One row per grid cell: m1,m2,loglik,bic,error.
void write_selection_csv(std::ostream& os, const Selection& s);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);

/// `%.17g` formatting.
std::string format_number(double v);

}  // namespace lagsieve
