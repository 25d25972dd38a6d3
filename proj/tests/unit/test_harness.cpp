#include <cmath>
#include <filesystem>
#include <fstream>

#include "blowup/error.hpp"
#include "blowup/harness.hpp"
#include "blowup/suite.hpp"
#include "doctest.h"

using namespace blowup;

TEST_CASE("config round trip and hash") {
    ExperimentConfig c;
    c.b0 = 0.025;
    c.C_D_sweep = {2.0, 7.5};
    c.rescale_k0 = true;
    const ExperimentConfig back = parse_config(serialize_config(c));
    CHECK(serialize_config(back) == serialize_config(c));
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
    CHECK(config_hash(c) != config_hash(ExperimentConfig{}));
    CHECK(std::isnan(back.c0));
}

TEST_CASE("config parser") {
    const auto c = parse_config("# comment\n p = 5  \n\nscenario = homogeneous # trailing\nseed=7\n");
    CHECK(c.p == 5.0);
    CHECK(c.scenario == "homogeneous");
    CHECK(c.seed == 7);
    CHECK_THROWS_AS(parse_config("nonsense = 1"), DomainError);
    CHECK_THROWS_AS(parse_config("p = three"), DomainError);
    CHECK_THROWS_AS(parse_config("p 3"), DomainError);
    CHECK_THROWS_AS(parse_config("seed = -1"), DomainError);
    CHECK_THROWS_AS(parse_config("scenario = elsewhere"), DomainError);
}

TEST_CASE("default initial data and the k0 rescaling") {
    ExperimentConfig c;
    const Grid g(100.0, 5001);
    const InitialData d = make_initial_data(c, g);
    CHECK(d.c0 == doctest::Approx(0.5 - 0.05 / 2));
    CHECK(d.norm_n3 <= d.delta3);
    CHECK(d.delta3 == doctest::Approx(0.0025));

    c.rescale_k0 = true;
    c.c0 = 1.0;
    const InitialData r = make_initial_data(c, g);
    const double k0 = 1.0 / std::sqrt(2.0 + 0.05);
    CHECK(r.k0 == doctest::Approx(k0));
    CHECK(r.b0 == doctest::Approx(0.05 * k0 * k0));
    CHECK(r.c0 == doctest::Approx(0.5 - r.b0 / 2));
}

TEST_CASE("initial data outside the hypotheses are rejected") {
    const Grid g(50.0, 1001);
    ExperimentConfig c;
    c.pert_amplitude = 0.01;  // four times C b0^2
    CHECK_THROWS_AS(make_initial_data(c, g), DomainError);
    ExperimentConfig w;
    w.c0 = 3.0;
    CHECK_THROWS_AS(make_initial_data(w, g), DomainError);
    ExperimentConfig q;
    q.p = 1.0;
    CHECK_THROWS_AS(make_initial_data(q, g), DomainError);
}

TEST_CASE("homogeneous scenario run and outputs") {
    ExperimentConfig c = parse_config("scenario = homogeneous\nx_N = 801");
    const RunReport r = run_pipeline(c);
    REQUIRE(r.status == "ok");
    CHECK(r.passed());
    CHECK(r.homogeneous->rel_error < 0.01);
    const auto dir = std::filesystem::temp_directory_path() / "blowup_harness_test";
    std::filesystem::remove_all(dir);
    write_run_outputs(r, dir);
    std::ifstream f(dir / "report.json");
    const auto j = nlohmann::json::parse(f);
    CHECK(j["config_hash"] == config_hash(c));
    CHECK(j["passed"] == true);
    std::filesystem::remove_all(dir);
}

TEST_CASE("failing stage is reported, not thrown") {
    ExperimentConfig c;
    c.pert_amplitude = 1.0;
    const RunReport r = run_pipeline(c);
    CHECK(r.status == "error");
    CHECK(r.error_stage == "initial-data");
    CHECK_FALSE(r.passed());
}

TEST_CASE("suite selection") {
    CHECK(suite_tags().size() == 13);
    const SuiteReport empty = verify_suite({});
    CHECK(empty.results.empty());
    CHECK(empty.passed());
    CHECK_THROWS_AS(verify_suite({"nope"}), DomainError);
    const SuiteReport eq = verify_suite({"equilibrium", "scaling"});
    REQUIRE(eq.results.size() == 2);
    CHECK(eq.passed());
    CHECK(format_line(eq.results[0]).rfind("[PASS] 12", 0) == 0);
    CHECK(to_json(eq).dump() == to_json(verify_suite({"equilibrium", "scaling"})).dump());
}

TEST_CASE("output directory does not change the hash") {
    ExperimentConfig a, b;
    a.out = "run_a";
    b.out = "run_b";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(serialize_config(a) != serialize_config(b));
}
