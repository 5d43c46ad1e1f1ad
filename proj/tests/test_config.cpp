#include <catch2/catch_amalgamated.hpp>

#include "evarbai/config.hpp"

using namespace evarbai;
using nlohmann::json;

namespace {

json minimal_config() {
    return json{{"instance",
                 {{"arms", {{{"bernoulli", 0.2}}, {{"bernoulli", 0.8}}}}}},
                {"alpha", 0.2},
                {"delta", 0.1}};
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
    ExperimentConfig cfg = parse_config_json(minimal_config());
    REQUIRE(cfg.arms.size() == 2);
    REQUIRE(cfg.alpha == 0.2);
    REQUIRE(cfg.deltas == std::vector<double>{0.1});
    REQUIRE(cfg.trials == 200);
    REQUIRE(cfg.seed == 1);
    REQUIRE(cfg.horizon_cap == 1000000);
    REQUIRE(cfg.quantization_grid == 1e-3);
    REQUIRE_FALSE(cfg.strict_tracking);
}

TEST_CASE("range errors name the offending key") {
    json bad = minimal_config();
    bad["alpha"] = 1.2;
    try {
        parse_config_json(bad);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        REQUIRE(std::string(e.what()).find("alpha") != std::string::npos);
    }

    json bad_delta = minimal_config();
    bad_delta["delta"] = 0.0;
    REQUIRE_THROWS_AS(parse_config_json(bad_delta), config_error);

    json bad_trials = minimal_config();
    bad_trials["trials"] = 0;
    try {
        parse_config_json(bad_trials);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        REQUIRE(std::string(e.what()).find("trials") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected") {
    json j = minimal_config();
    j["mystery"] = 1;
    try {
        parse_config_json(j);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        REQUIRE(std::string(e.what()).find("mystery") != std::string::npos);
    }

    json nested = minimal_config();
    nested["solver"] = {{"whatever", 3}};
    REQUIRE_THROWS_AS(parse_config_json(nested), config_error);

    json arm = minimal_config();
    arm["instance"]["arms"][0] = {{"gaussian", 0.5}};
    REQUIRE_THROWS_AS(parse_config_json(arm), config_error);
}

TEST_CASE("arm literals") {
    json j = minimal_config();
    j["instance"]["arms"] = {
        {{"discrete", {{0.0, 0.5}, {1.0, 0.5}}}},
        {{"bernoulli", 0.9}},
        {{"beta_quantized", {{"a", 2.0}, {"b", 5.0}}}},
    };
    j["quantization_grid"] = 0.01;
    ExperimentConfig cfg = parse_config_json(j);
    REQUIRE(cfg.arms.size() == 3);
    const auto& beta = std::get<BetaQuantizedArm>(cfg.arms[2]);
    REQUIRE(beta.grid == 0.01);  // config default applies

    SECTION("distribution literals are validated") {
        json bad = minimal_config();
        bad["instance"]["arms"][0] = {{"discrete", {{0.0, 0.5}, {1.0, 0.6}}}};
        REQUIRE_THROWS_AS(parse_config_json(bad), config_error);
    }
}

TEST_CASE("round trip") {
    json j = minimal_config();
    j["trials"] = 77;
    j["seed"] = 123456789;
    j["delta"] = {0.1, 0.01};
    j["solver"] = {{"t_max", 150.0}, {"mirror_iters", 300}};
    j["out"] = {{"summary", "s.csv"}, {"trials", "t.jsonl"}};
    j["instance"]["arms"].push_back({{"beta_quantized", {{"a", 1.5}, {"b", 3.0}, {"grid", 0.002}}}});
    ExperimentConfig cfg = parse_config_json(j);
    ExperimentConfig again = parse_config_json(to_json(cfg));
    REQUIRE(cfg == again);
}

TEST_CASE("sweep requires at least two deltas") {
    ExperimentConfig cfg = parse_config_json(minimal_config());
    REQUIRE_THROWS_AS(run_sweep(cfg, 1), config_error);
}

TEST_CASE("tas_config carries overrides through") {
    json j = minimal_config();
    j["horizon_cap"] = 5000;
    j["strict_tracking"] = true;
    j["dense_recompute_until"] = 10;
    ExperimentConfig cfg = parse_config_json(j);
    TasConfig tc = tas_config(cfg, 0.05);
    REQUIRE(tc.delta == 0.05);
    REQUIRE(tc.horizon_cap == 5000);
    REQUIRE(tc.strict_tracking);
    REQUIRE(tc.dense_recompute_until == 10);
}
