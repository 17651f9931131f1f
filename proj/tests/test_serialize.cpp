#include <catch2/catch_amalgamated.hpp>

#include "ncmet/experiment.hpp"
#include "ncmet/serialize.hpp"

using namespace ncmet;

TEST_CASE("algebra round trip") {
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{3, 0.1234567890123456789},
         AbelianBlock{(RealVector(2) << 0.3333333333333333, 1e-7).finished()}});
    const Json j = algebra_to_json(*alg);
    AlgebraPtr back = algebra_from_json(j);
    CHECK(alg->same_layout(*back));
    // binary64-exact round trip through text
    AlgebraPtr again = algebra_from_json(Json::parse(j.dump()));
    CHECK(alg->same_layout(*again));
}

TEST_CASE("element round trip is binary64 exact") {
    AlgebraPtr alg = TracialAlgebra::make(
        {FactorBlock{2, 0.5}, AbelianBlock{(RealVector(3) << 0.1, 0.2, 0.7).finished()}});
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        const AlgebraElement x = random_element(alg, rng);
        const AlgebraElement back =
            element_from_json(alg, Json::parse(element_to_json(x).dump()));
        CHECK(l2_distance(back, x) == 0.0);
    }
}

TEST_CASE("element validation") {
    AlgebraPtr alg = TracialAlgebra::normalized_matrix(2);
    CHECK_THROWS_AS(element_from_json(alg, Json::array()), ConfigError);
    Json bad = Json::array({Json::array({Json::array({Json::array({1.0, 0.0})})})});
    CHECK_THROWS_AS(element_from_json(alg, bad), ConfigError);
}

TEST_CASE("unknown fields are rejected") {
    Json j = preset_config("odometer-counterexample");
    j["surprise"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    Json j2 = preset_config("odometer-counterexample");
    j2["cocycle"]["base"]["extra"] = true;
    CHECK_THROWS_AS(parse_config(j2), ConfigError);

    Json j3 = preset_config("odometer-counterexample");
    j3["algebra"]["blocks"][0]["color"] = "red";
    CHECK_THROWS_AS(parse_config(j3), ConfigError);
}

TEST_CASE("config validation") {
    Json j = preset_config("odometer-counterexample");
    j["seeds"] = Json::array();
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = preset_config("odometer-counterexample");
    j["seeds"] = Json::array({1, 1});
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = preset_config("odometer-counterexample");
    j["horizons"] = Json::array({16, 8});
    CHECK_THROWS_AS(parse_config(j), UsageError);

    j = preset_config("odometer-counterexample");
    j["schema_version"] = 2;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = preset_config("odometer-counterexample");
    j["smooth_epsilon"] = -0.1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = preset_config("odometer-counterexample");
    j["criteria"].push_back("not-a-criterion");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config echo round trip") {
    for (const char* name : {"odometer-counterexample", "classical-oseledets-2x2"}) {
        const Json j = preset_config(name);
        const ExperimentConfig cfg = parse_config(j);
        const Json echo = config_to_json(cfg);
        // parse(serialize(config)) = config
        const ExperimentConfig cfg2 = parse_config(echo);
        CHECK(config_to_json(cfg2) == echo);
        CHECK(cfg2.horizons == cfg.horizons);
        CHECK(cfg2.seeds == cfg.seeds);
        CHECK(cfg2.algebra->same_layout(*cfg.algebra));
    }
}

TEST_CASE("presets build runnable systems") {
    for (const char* name : {"odometer-counterexample", "classical-oseledets-2x2"}) {
        const ExperimentConfig cfg = parse_config(preset_config(name));
        const CocycleSystem sys = make_cocycle(cfg);
        const AlgebraElement xi = resolve_growth_vector(cfg);
        CHECK(l2_norm(xi) > 0.0);
        const BasePoint x = sys.base().initial_point(cfg.seeds.front());
        CHECK(is_invertible(sys.generator(x)));
    }
    CHECK_THROWS_AS(preset_config("no-such-preset"), UsageError);
}

TEST_CASE("double formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 2.5}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}
