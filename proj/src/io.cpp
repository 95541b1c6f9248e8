#include "lagsieve/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lagsieve/errors.hpp"

namespace lagsieve {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const char* field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("bad number '") + s + "' in field " + field);
}

int parse_int(const std::string& s, const char* field) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("bad integer '") + s + "' in field " + field);
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

const std::vector<std::string> kDatasetHeader{"id", "s1", "s2", "w_tilde", "location"};
const std::vector<std::string> kRawHeader{"id",         "s1",
                                          "s2",         "window_start",
                                          "window_end", "second_window_end",
                                          "location"};

std::optional<double> optional_number(const std::string& s, const char* field) {
    if (s.empty()) return std::nullopt;
    return parse_number(s, field);
}

}  // namespace

void write_dataset_csv(std::ostream& os, std::span<const Observation> data) {
    os << "id,s1,s2,w_tilde,location\n";
    for (const Observation& o : data) {
        os << o.id << ',' << format_number(o.s1) << ',' << format_number(o.s2) << ',' << format_number(o.w_tilde)
           << ',' << o.location << '\n';
    }
}

void write_dataset_csv(const std::string& path, std::span<const Observation> data) {
    std::ofstream out = open_out(path);
    write_dataset_csv(out, data);
}

IngestResult ingest_csv(std::istream& is, double lookback) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("empty CSV input");
    const std::vector<std::string> header = split_fields(line);
    const bool raw = header == kRawHeader;
    if (!raw && header != kDatasetHeader) {
        throw ValidationError("unrecognized CSV header '" + trim(line) +
                              "' (expected id,s1,s2,w_tilde,location or "
                              "id,s1,s2,window_start,window_end,second_window_end,location)");
    }
    const std::size_t width = header.size();
    IngestResult out;
    std::vector<RawRecord> records;
    std::vector<std::size_t> record_lines;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_fields(line);
        const std::string id = f.empty() ? "" : f[0];
        try {
            if (f.size() != width) {
                throw ValidationError("expected " + std::to_string(width) + " fields, got " +
                                      std::to_string(f.size()));
            }
            if (raw) {
                RawRecord r;
                r.id = f[0];
                r.s1 = parse_number(f[1], "s1");
                r.s2 = parse_number(f[2], "s2");
                r.window_start = optional_number(f[3], "window_start");
                r.window_end = optional_number(f[4], "window_end");
                r.second_window_end = optional_number(f[5], "second_window_end");
                r.location = parse_int(f[6], "location");
                records.push_back(std::move(r));
                record_lines.push_back(line_no);
            } else {
                Observation o;
                o.id = f[0];
                o.s1 = parse_number(f[1], "s1");
                o.s2 = parse_number(f[2], "s2");
                o.w_tilde = parse_number(f[3], "w_tilde");
                o.location = parse_int(f[4], "location");
                validate(o);
                out.observations.push_back(std::move(o));
            }
        } catch (const ValidationError& e) {
            out.errors.push_back({line_no, id, e.what()});
        }
    }
    if (raw) {
        ImputationResult imputed = impute_windows(records, lookback);
        out.observations = std::move(imputed.observations);
        for (RecordError& e : imputed.errors) {
            e.index = record_lines[e.index];
            out.errors.push_back(std::move(e));
        }
        std::sort(out.errors.begin(), out.errors.end(),
                  [](const RecordError& a, const RecordError& b) { return a.index < b.index; });
    }
    return out;
}

IngestResult ingest_csv(const std::string& path, double lookback) {
    std::ifstream in = open_in(path);
    return ingest_csv(in, lookback);
}

std::vector<Observation> read_dataset_csv(const std::string& path) {
    IngestResult r = ingest_csv(path);
    if (!r.errors.empty()) {
        const RecordError& e = r.errors.front();
        throw ValidationError(path + ":" + std::to_string(e.index) + ": " + e.reason);
    }
    return std::move(r.observations);
}

void write_errors_csv(const std::string& path, std::span<const RecordError> errors) {
    std::ofstream out = open_out(path);
    out << "line,id,reason\n";
    for (const RecordError& e : errors) {
        std::string reason = e.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << e.index << ',' << e.id << ',' << reason << '\n';
    }
}

std::map<std::string, std::string> parse_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ValidationError("config line " + std::to_string(line_no) + ": empty key or value");
        }
        if (!kv.emplace(key, value).second) throw ValidationError("config: duplicate key '" + key + "'");
    }
    return kv;
}

namespace {

struct LocationKey {
    int location;
    std::string field;  // "rate" or "prob"
};

std::optional<LocationKey> location_key(const std::string& key) {
    if (key.rfind("location.", 0) != 0) return std::nullopt;
    const std::string rest = key.substr(9);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) throw ValidationError("config: malformed key '" + key + "'");
    const std::string field = rest.substr(dot + 1);
    if (field != "rate" && field != "prob") throw ValidationError("config: unknown key '" + key + "'");
    return LocationKey{parse_int(rest.substr(0, dot), key.c_str()), field};
}

const std::vector<std::string> kScalarKeys{"window", "incubation", "generation", "n", "seed"};

}  // namespace

GeneratorConfig generator_config_from(const std::map<std::string, std::string>& kv) {
    GeneratorConfig cfg;
    std::map<int, double> rates, probs;
    for (const auto& [key, value] : kv) {
        if (const auto lk = location_key(key)) {
            (lk->field == "rate" ? rates : probs)[lk->location] = parse_number(value, key.c_str());
        } else if (key == "window") {
            cfg.w_dist = GenericDensity::parse(value);
        } else if (key == "incubation") {
            cfg.phi_i_true = GenericDensity::parse(value);
        } else if (key == "generation") {
            cfg.phi_g_true = GenericDensity::parse(value);
        } else if (key == "n") {
            const int n = parse_int(value, "n");
            if (n < 1) throw ValidationError("config: n must be at least 1");
            cfg.n = static_cast<std::size_t>(n);
        } else if (key == "seed") {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(value, &used);
                if (used != value.size()) throw std::invalid_argument(value);
            } catch (const std::exception&) {
                throw ValidationError("config: bad seed '" + value + "'");
            }
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    if (!rates.empty()) cfg.rates = rates;
    if (!probs.empty()) cfg.p_c = probs;
    cfg.validate();
    return cfg;
}

GeneratorConfig load_generator_config(const std::string& path) {
    std::ifstream in = open_in(path);
    return generator_config_from(parse_key_values(in));
}

ExposureModel exposure_model_from(const std::map<std::string, std::string>& kv) {
    ExposureModel em;
    for (const auto& [key, value] : kv) {
        if (const auto lk = location_key(key)) {
            if (lk->field == "rate") em.set_rate(lk->location, parse_number(value, key.c_str()));
        } else if (std::find(kScalarKeys.begin(), kScalarKeys.end(), key) == kScalarKeys.end()) {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    if (em.rates().empty()) throw ValidationError("exposure model config defines no location.<c>.rate");
    return em;
}

ExposureModel load_exposure_model(const std::string& path) {
    std::ifstream in = open_in(path);
    return exposure_model_from(parse_key_values(in));
}

Json to_json(const LaguerreDensity& d) { return Json{{"m", d.degree()}, {"theta", d.theta()}}; }

LaguerreDensity laguerre_from_json(const Json& j) {
    try {
        const std::vector<double> theta = j.at("theta").get<std::vector<double>>();
        if (theta.empty()) throw ValidationError("laguerre density: empty theta");
        if (j.contains("m") && j.at("m").get<int>() + 1 != static_cast<int>(theta.size())) {
            throw ValidationError("laguerre density: m does not match the length of theta");
        }
        if (static_cast<int>(theta.size()) - 1 > kMaxLaguerreDegree) {
            throw UnsupportedDegreeError("laguerre density: degree above " + std::to_string(kMaxLaguerreDegree));
        }
        return LaguerreDensity::from_coefficients(theta);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("laguerre density JSON: ") + e.what());
    }
}

LaguerreDensity read_laguerre_json(const std::string& path) { return laguerre_from_json(read_json(path)); }

Json to_json(const QuadratureConfig& q) {
    return Json{{"nodes_t", q.nodes_t}, {"nodes_y", q.nodes_y}, {"log_floor", q.log_floor}};
}

Json to_json(const FitOptions& o) {
    return Json{{"n_starts", o.n_starts},
                {"max_iters", o.max_iters},
                {"simplex_tol", o.simplex_tol},
                {"seed", o.seed},
                {"polish_restarts", o.polish_restarts},
                {"bic_counts_coefficients", o.bic_counts_coefficients},
                {"quadrature", to_json(o.quadrature)}};
}

Json to_json(const ExposureModel& em) {
    Json j = Json::object();
    for (const auto& [loc, r] : em.rates()) j[std::to_string(loc)] = r;
    return j;
}

Json to_json(const GeneratorConfig& cfg) {
    Json p = Json::object();
    for (const auto& [loc, v] : cfg.p_c) p[std::to_string(loc)] = v;
    return Json{{"window", cfg.w_dist.descriptor()},
                {"location_prob", p},
                {"location_rate", to_json(ExposureModel(cfg.rates))},
                {"incubation", cfg.phi_i_true.descriptor()},
                {"generation", cfg.phi_g_true.descriptor()},
                {"n", cfg.n},
                {"seed", cfg.seed}};
}

Json to_json(const FitResult& fit, const ExposureModel& em) {
    Json starts = Json::array();
    for (const StartDiagnostics& s : fit.starts) {
        starts.push_back({{"initial_loglik", s.initial_loglik},
                          {"final_loglik", s.final_loglik},
                          {"iterations", s.iterations},
                          {"evaluations", s.evaluations},
                          {"converged", s.converged}});
    }
    return Json{{"version", kVersion},
                {"m1", fit.m1()},
                {"m2", fit.m2()},
                {"theta_i", fit.phi_i_hat.theta()},
                {"theta_g", fit.phi_g_hat.theta()},
                {"loglik", fit.loglik},
                {"bic", fit.bic},
                {"n", fit.n},
                {"seed", fit.options.seed},
                {"exposure_rates", to_json(em)},
                {"options", to_json(fit.options)},
                {"starts", starts}};
}

FitResult fit_from_json(const Json& j) {
    try {
        FitResult r{LaguerreDensity::from_coefficients(j.at("theta_i").get<std::vector<double>>()),
                    LaguerreDensity::from_coefficients(j.at("theta_g").get<std::vector<double>>()),
                    j.value("loglik", 0.0),
                    j.value("bic", 0.0),
                    j.value("n", std::size_t{0}),
                    {},
                    {}};
        if (j.contains("options")) {
            const Json& o = j.at("options");
            r.options.n_starts = o.value("n_starts", r.options.n_starts);
            r.options.max_iters = o.value("max_iters", r.options.max_iters);
            r.options.simplex_tol = o.value("simplex_tol", r.options.simplex_tol);
            r.options.polish_restarts = o.value("polish_restarts", r.options.polish_restarts);
            r.options.bic_counts_coefficients = o.value("bic_counts_coefficients", false);
            if (o.contains("quadrature")) {
                const Json& q = o.at("quadrature");
                r.options.quadrature.nodes_t = q.value("nodes_t", r.options.quadrature.nodes_t);
                r.options.quadrature.nodes_y = q.value("nodes_y", r.options.quadrature.nodes_y);
                r.options.quadrature.log_floor = q.value("log_floor", r.options.quadrature.log_floor);
            }
        }
        r.options.seed = j.value("seed", r.options.seed);
        if (j.contains("starts")) {
            for (const Json& s : j.at("starts")) {
                r.starts.push_back({s.value("initial_loglik", 0.0), s.value("final_loglik", 0.0),
                                    s.value("iterations", std::size_t{0}), s.value("evaluations", std::size_t{0}),
                                    s.value("converged", false)});
            }
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("fit JSON: ") + e.what());
    }
}

FitResult read_fit_json(const std::string& path) { return fit_from_json(read_json(path)); }

namespace {

std::string prob_key(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p);
    return buf;
}

Json prob_map(const std::map<double, double>& m) {
    Json j = Json::object();
    for (const auto& [p, v] : m) j[prob_key(p)] = v;
    return j;
}

}  // namespace

Json to_json(const FeatureReport& r) {
    return Json{{"r0", r.r0},
                {"growth_rate_used", r.growth_rate_used},
                {"quantiles_i", prob_map(r.quantiles_i)},
                {"quantiles_g", prob_map(r.quantiles_g)},
                {"presymptomatic_prob", r.presymptomatic_prob}};
}

Json to_json(const Selection& s) {
    Json table = Json::array();
    for (const ModelCell& c : s.table) {
        Json row{{"m1", c.m1}, {"m2", c.m2}};
        if (c.fit) {
            row["loglik"] = c.fit->loglik;
            row["bic"] = c.fit->bic;
        } else {
            row["error"] = c.error;
        }
        table.push_back(row);
    }
    return Json{{"version", kVersion}, {"best", {{"m1", s.best.first}, {"m2", s.best.second}}}, {"table", table}};
}

Json to_json(const StudyReport& r) {
    Json rows = Json::array();
    for (const StudyRow& row : r.rows) {
        Json j{{"replication", row.replication}, {"seed", row.seed}, {"ok", row.ok}, {"attempts", row.attempts}};
        if (row.ok) {
            j["loglik"] = row.loglik;
            j["hellinger_sq_i"] = row.hellinger_sq_i;
            j["hellinger_sq_g"] = row.hellinger_sq_g;
            j["hellinger_sq_i_target"] = row.hellinger_sq_i_target;
            j["hellinger_sq_g_target"] = row.hellinger_sq_g_target;
            j["r0_hat"] = row.r0_hat;
            j["presymptomatic_prob"] = row.presymptomatic_prob;
            j["quantiles_i"] = prob_map(row.quantiles_i);
            j["quantiles_g"] = prob_map(row.quantiles_g);
            j["theta_i"] = row.theta_i;
            j["theta_g"] = row.theta_g;
        } else {
            j["error"] = row.error;
        }
        rows.push_back(j);
    }
    Json summaries = Json::object();
    for (const ColumnSummary& s : r.summaries) {
        summaries[s.name] = {{"count", s.count}, {"mean", s.mean}, {"quantiles", prob_map(s.quantiles)}};
    }
    return Json{{"version", kVersion},
                {"config", to_json(r.config)},
                {"m1", r.m1},
                {"m2", r.m2},
                {"growth_rate", r.growth_rate},
                {"fit_options", to_json(r.options.fit)},
                {"retries", r.options.retries},
                {"target_i", to_json(r.target_i)},
                {"target_g", to_json(r.target_g)},
                {"r0_true", r.r0_true},
                {"replications", r.rows.size()},
                {"failures", r.failures},
                {"summaries", summaries},
                {"rows", rows}};
}

Json to_json(const BootstrapResult& r) {
    return Json{{"version", kVersion},
                {"m1", r.m1},
                {"m2", r.m2},
                {"observed_i", r.observed_i},
                {"observed_g", r.observed_g},
                {"target_i", to_json(r.target_i)},
                {"target_g", to_json(r.target_g)},
                {"n_sims", r.n_sims},
                {"failures", r.failures},
                {"exceed_i", r.exceed_i},
                {"exceed_g", r.exceed_g},
                {"exceed_joint", r.exceed_joint},
                {"p_i", r.p_i},
                {"p_g", r.p_g},
                {"p_joint", r.p_joint},
                {"sim_i", r.sim_i},
                {"sim_g", r.sim_g}};
}

void write_study_csv(std::ostream& os, const StudyReport& r) {
    os << "replication,seed,ok,attempts,loglik,hellinger_sq_i,hellinger_sq_g,hellinger_sq_i_target,"
          "hellinger_sq_g_target,r0_hat,presymptomatic_prob";
    for (double p : r.options.probs) os << ",quantile_i_" << prob_key(p) << ",quantile_g_" << prob_key(p);
    os << '\n';
    for (const StudyRow& row : r.rows) {
        os << row.replication << ',' << row.seed << ',' << (row.ok ? 1 : 0) << ',' << row.attempts;
        if (row.ok) {
            for (double v : {row.loglik, row.hellinger_sq_i, row.hellinger_sq_g, row.hellinger_sq_i_target,
                             row.hellinger_sq_g_target, row.r0_hat, row.presymptomatic_prob}) {
                os << ',' << format_number(v);
            }
            for (double p : r.options.probs) {
                os << ',' << format_number(row.quantiles_i.at(p)) << ',' << format_number(row.quantiles_g.at(p));
            }
        } else {
            for (std::size_t k = 0; k < 7 + 2 * r.options.probs.size(); ++k) os << ',';
        }
        os << '\n';
    }
}

void write_selection_csv(std::ostream& os, const Selection& s) {
    os << "m1,m2,loglik,bic,error\n";
    for (const ModelCell& c : s.table) {
        os << c.m1 << ',' << c.m2 << ',';
        if (c.fit) {
            os << format_number(c.fit->loglik) << ',' << format_number(c.fit->bic) << ",\n";
        } else {
            std::string reason = c.error;
            std::replace(reason.begin(), reason.end(), ',', ';');
            os << ",," << reason << '\n';
        }
    }
}

Json read_json(const std::string& path) {
    std::ifstream in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace lagsieve
