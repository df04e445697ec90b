#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xbar/config.hpp"

using namespace xbar;

namespace {

std::string repo_config(const char* name) { return std::string(XBAR_DATA_DIR "/../configs/") + name; }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("presets carry the published operating points") {
    const ExperimentConfig air = preset_airline();
    CHECK(air.alpha == 0.01);
    CHECK(air.eta == 0.9);
    CHECK(air.g_per_w == 1e-4);
    CHECK(air.epochs == 800);
    CHECK(air.batch_size == 1);
    CHECK(air.device.dvgate_per_dg == 1.02e4);
    CHECK(air.device.v_gate0 == 1.0);
    CHECK(air.device.v_set == 2.5);
    CHECK(air.device.v_reset == 1.7);
    CHECK(air.device.v_read == 0.2);
    CHECK(air.device.v_gate_max == 1.6);
    CHECK(air.device.v_gate_min == 0.7);
    CHECK(air.device.v_gate_reset == 5.0);
    CHECK(air.hidden_dim == 15);

    const ExperimentConfig gait = preset_gait_synthetic();
    CHECK(gait.alpha == 0.01);
    CHECK(gait.eta == 0.0);
    CHECK(gait.beta == 0.9);
    CHECK(gait.epsilon == 1e-8);
    CHECK(gait.g_per_w == 3e-4);
    CHECK(gait.epochs == 50);
    CHECK(gait.batch_size == 50);
    CHECK(gait.hidden_dim == 14);
    CHECK(gait.optimizer == "rmsprop");
    CHECK_FALSE(gait.lstm_bias);
    CHECK_FALSE(gait.fc_bias);

    CHECK_THROWS_AS(preset("unknown"), std::invalid_argument);
}

TEST_CASE("preset json golden files match the in-code presets byte for byte") {
    CHECK(preset_airline().to_json() == read_file(repo_config("airline.json")));
    CHECK(preset_gait_synthetic().to_json() == read_file(repo_config("gait_synthetic.json")));
}

TEST_CASE("config json round-trips") {
    ExperimentConfig cfg = preset_gait_synthetic();
    cfg.seed = 777;
    cfg.noise.program_noise_abs = 1e-6;
    cfg.gait.videos_per_class = 5;
    const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.seed == 777);
    CHECK(back.noise.program_noise_abs == 1e-6);
    CHECK(back.gait.videos_per_class == 5);
}

TEST_CASE("preset configs validate clean") {
    CHECK(validate_config(preset_airline()).ok());
    CHECK(validate_config(preset_gait_synthetic()).ok());
}

TEST_CASE("validation names each violated rule") {
    SUBCASE("overlapping partitions") {
        ExperimentConfig cfg = preset_airline();
        cfg.fc_partition = Partition{0, 32, 30, 1};  // inside the LSTM block
        const ValidationReport r = validate_config(cfg);
        REQUIRE_FALSE(r.ok());
        bool found = false;
        for (const std::string& v : r.violations) found = found || v.find("overlap") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("v_full_scale above the read voltage") {
        ExperimentConfig cfg = preset_airline();
        cfg.v_full_scale = 0.3;
        const ValidationReport r = validate_config(cfg);
        REQUIRE_FALSE(r.ok());
        bool found = false;
        for (const std::string& v : r.violations)
            found = found || v.find("v_full_scale") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("partition footprint mismatch") {
        ExperimentConfig cfg = preset_airline();
        cfg.hidden_dim = 14;  // partitions still sized for 15 units
        const ValidationReport r = validate_config(cfg);
        CHECK_FALSE(r.ok());
    }
    SUBCASE("task/head mismatch") {
        ExperimentConfig cfg = preset_airline();
        cfg.fc_activation = "softmax";
        CHECK_FALSE(validate_config(cfg).ok());
    }
    SUBCASE("bad gate window") {
        ExperimentConfig cfg = preset_airline();
        cfg.device.v_gate_min = 1.2;
        CHECK_FALSE(validate_config(cfg).ok());
    }
}

TEST_CASE("unknown config keys are rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"tsak": "airline"})"), std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"device": {"v_set": 2.5}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(ExperimentConfig::from_json("not json"), std::invalid_argument);
}
