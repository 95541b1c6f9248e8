#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lagsieve/errors.hpp"
#include "lagsieve/io.hpp"

using namespace lagsieve;
using doctest::Approx;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "lagsieve_unit";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> kv_of(const std::string& text) {
    std::istringstream is(text);
    return parse_key_values(is);
}

}  // namespace

TEST_CASE("dataset CSV round trip is lossless") {
    GeneratorConfig cfg;
    cfg.n = 50;
    cfg.seed = 8;
    const auto data = sample_dataset(cfg);
    const auto path = scratch("round.csv");
    write_dataset_csv(path.string(), data);
    const auto back = read_dataset_csv(path.string());
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].id == data[i].id);
        CHECK(back[i].s1 == data[i].s1);
        CHECK(back[i].s2 == data[i].s2);
        CHECK(back[i].w_tilde == data[i].w_tilde);
        CHECK(back[i].location == data[i].location);
    }
    const auto again = scratch("round2.csv");
    write_dataset_csv(again.string(), back);
    CHECK(slurp(path) == slurp(again));
}

TEST_CASE("dataset CSV problems are reported per line") {
    std::istringstream is(
        "id,s1,s2,w_tilde,location\n"
        "a,5,9,2,0\n"
        "b,3,9,4,0\n"
        "\n"
        "c,x,9,1,1\n"
        "d,5,9\n"
        "e,6,10,6,1\n");
    const IngestResult r = ingest_csv(is);
    REQUIRE(r.observations.size() == 2);
    CHECK(r.observations[0].id == "a");
    CHECK(r.observations[1].id == "e");
    REQUIRE(r.errors.size() == 3);
    CHECK(r.errors[0].index == 3);
    CHECK(r.errors[0].id == "b");
    CHECK(r.errors[1].index == 5);
    CHECK(r.errors[2].index == 6);

    std::istringstream bad_header("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(ingest_csv(bad_header), ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(ingest_csv(empty), ValidationError);
    CHECK_THROWS_AS(ingest_csv(scratch("missing.csv").string() + ".nope"), ValidationError);
}

TEST_CASE("raw records are imputed on ingestion") {
    std::istringstream is(
        "id,s1,s2,window_start,window_end,second_window_end,location\n"
        "p1,70,75,,,,0\n"
        "p2,12,18,2,9,,1\n"
        "p3,4,9,6,8,,0\n"
        "p4,20,15,10,,,0\n");
    const IngestResult r = ingest_csv(is);
    REQUIRE(r.observations.size() == 3);
    CHECK(r.observations[0].s1 == 60.0);
    CHECK(r.observations[0].w_tilde == 60.0);
    CHECK(r.observations[1].w_tilde == 7.0);
    CHECK(r.observations[1].location == 1);
    CHECK(r.observations[2].w_tilde == 5.0);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].index == 4);
    CHECK(r.errors[0].id == "p3");

    std::istringstream again("id,s1,s2,window_start,window_end,second_window_end,location\np1,70,75,,,,0\n");
    CHECK(ingest_csv(again, 20.0).observations[0].s1 == 20.0);

    const auto path = scratch("errors.csv");
    write_errors_csv(path.string(), r.errors);
    const std::string text = slurp(path);
    CHECK(text.rfind("line,id,reason\n4,p3,", 0) == 0);
}

TEST_CASE("key-value parsing") {
    const auto kv = kv_of("# comment\n  n = 12  \nseed=7 # trailing\n\nwindow = exponential:0.5\n");
    CHECK(kv.size() == 3);
    CHECK(kv.at("n") == "12");
    CHECK(kv.at("seed") == "7");
    CHECK(kv.at("window") == "exponential:0.5");
    CHECK_THROWS_AS(kv_of("n = 1\nn = 2\n"), ValidationError);
    CHECK_THROWS_AS(kv_of("just words\n"), ValidationError);
    CHECK_THROWS_AS(kv_of("n =\n"), ValidationError);
}

TEST_CASE("generator configuration from key-values") {
    const GeneratorConfig d = generator_config_from({});
    CHECK(d.n == 40);
    CHECK(d.p_c.at(1) == 0.35);
    CHECK(d.rates.at(1) == Approx(std::numbers::ln2 / 5.0));

    const GeneratorConfig c = generator_config_from(kv_of(
        "location.1.rate = 0.1\nlocation.1.prob = 1\nn = 25\nseed = 99\n"
        "incubation = weibull:2,4\ngeneration = laguerre:1,0.5\nwindow = lognormal:1,0.5\n"));
    CHECK(c.n == 25);
    CHECK(c.seed == 99);
    CHECK(c.rates == std::map<int, double>{{1, 0.1}});
    CHECK(c.p_c == std::map<int, double>{{1, 1.0}});
    CHECK(c.phi_i_true.descriptor() == GenericDensity(Weibull{2.0, 4.0}).descriptor());
    REQUIRE(c.phi_g_true.as_laguerre() != nullptr);
    CHECK(c.phi_g_true.as_laguerre()->degree() == 1);
    CHECK(std::holds_alternative<LogNormal>(c.w_dist.value()));
    CHECK(sample_dataset(c).size() == 25);

    CHECK_THROWS_AS(generator_config_from(kv_of("colour = red\n")), ValidationError);
    CHECK_THROWS_AS(generator_config_from(kv_of("location.1.size = 3\n")), ValidationError);
    CHECK_THROWS_AS(generator_config_from(kv_of("n = 0\n")), ValidationError);
    CHECK_THROWS_AS(generator_config_from(kv_of("seed = -4x\n")), ValidationError);
    CHECK_THROWS_AS(generator_config_from(kv_of("location.0.prob = 0.5\nlocation.1.prob = 0.4\n")), ValidationError);
    CHECK_THROWS_AS(generator_config_from(kv_of("incubation = gamma:1,2\n")), ValidationError);

    const ExposureModel em = exposure_model_from(kv_of("location.1.rate = 0.1386294\nlocation.0.rate = 0\nn = 5\n"));
    CHECK(em.rate(1) == 0.1386294);
    CHECK(em.rate(0) == 0.0);
    CHECK_THROWS_AS(exposure_model_from(kv_of("n = 5\n")), ValidationError);

    const auto path = scratch("gen.cfg");
    std::ofstream(path) << "n = 3\nseed = 4\n";
    CHECK(load_generator_config(path.string()).n == 3);
}

TEST_CASE("fit JSON round trip") {
    GeneratorConfig cfg;
    cfg.seed = 10;
    const auto data = sample_dataset(cfg);
    const ExposureModel em = cfg.exposure_model();
    FitOptions opts;
    opts.seed = 5;
    opts.n_starts = 3;
    opts.quadrature.nodes_t = 48;
    const FitResult f = fit(data, em, 2, 1, opts);
    const Json j = to_json(f, em);
    CHECK(j.at("version") == kVersion);
    CHECK(j.at("m1") == 2);
    CHECK(j.at("m2") == 1);
    CHECK(j.at("seed") == 5);
    CHECK(j.at("starts").size() == 3);

    const auto path = scratch("fit.json");
    write_json(path.string(), j);
    const FitResult back = read_fit_json(path.string());
    CHECK(back.phi_i_hat.theta() == f.phi_i_hat.theta());
    CHECK(back.phi_g_hat.theta() == f.phi_g_hat.theta());
    CHECK(back.loglik == f.loglik);
    CHECK(back.bic == f.bic);
    CHECK(back.n == f.n);
    CHECK(back.options.seed == 5);
    CHECK(back.options.n_starts == 3);
    CHECK(back.options.quadrature.nodes_t == 48);
    REQUIRE(back.starts.size() == 3);
    CHECK(back.starts[1].final_loglik == f.starts[1].final_loglik);
    CHECK(to_json(back, em).dump() == j.dump());

    CHECK_THROWS_AS(fit_from_json(Json{{"theta_i", "nope"}}), ValidationError);
}

TEST_CASE("Laguerre density JSON") {
    const LaguerreDensity d = LaguerreDensity::from_coefficients({0.3, -0.2, 0.9});
    const Json j = to_json(d);
    CHECK(j.at("m") == 2);
    CHECK(laguerre_from_json(j).theta() == d.theta());
    CHECK_THROWS_AS(laguerre_from_json(Json{{"m", 1}, {"theta", {1.0, 0.0, 0.0}}}), ValidationError);
    CHECK_THROWS_AS(laguerre_from_json(Json{{"theta", Json::array()}}), ValidationError);
    CHECK_THROWS_AS(laguerre_from_json(Json{{"theta", std::vector<double>(62, 0.1)}}), UnsupportedDegreeError);

    const auto path = scratch("lag.json");
    write_json(path.string(), j);
    CHECK(read_laguerre_json(path.string()).theta() == d.theta());
    CHECK(GenericDensity::parse("laguerre-file:" + path.string()).as_laguerre()->theta() == d.theta());

    std::ofstream(scratch("broken.json")) << "{ not json";
    CHECK_THROWS_AS(read_json(scratch("broken.json").string()), ValidationError);
}

TEST_CASE("report documents") {
    const FeatureReport fr{1.5, 0.1, {{0.5, 2.0}}, {{0.5, 3.0}}, 0.4};
    const Json fj = to_json(fr);
    CHECK(fj.at("r0") == 1.5);
    CHECK(fj.at("quantiles_g").at("0.5") == 3.0);

    GeneratorConfig cfg;
    cfg.seed = 4;
    MonteCarloOptions mc;
    mc.threads = 1;
    const StudyReport rep = run_study(cfg, 1, 1, 2, 0.1, mc);
    const Json sj = to_json(rep);
    CHECK(sj.at("rows").size() == 2);
    CHECK(sj.at("summaries").contains("hellinger_sq_g"));
    std::ostringstream csv;
    write_study_csv(csv, rep);
    std::istringstream lines(csv.str());
    std::string header, row;
    std::getline(lines, header);
    CHECK(header.rfind("replication,seed,ok,attempts,loglik,", 0) == 0);
    CHECK(header.find("quantile_g_0.9") != std::string::npos);
    std::getline(lines, row);
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));

    const auto data = sample_dataset(cfg);
    const Selection sel = select_model(data, cfg.exposure_model(), parse_grid("1x1..2"));
    std::ostringstream sc;
    write_selection_csv(sc, sel);
    CHECK(sc.str().rfind("m1,m2,loglik,bic,error\n1,1,", 0) == 0);
    CHECK(to_json(sel).at("table").size() == 2);

    CHECK(format_number(0.1) == "0.10000000000000001");
}
