#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbar/codec.hpp"
#include "xbar/data.hpp"
#include "xbar/device.hpp"
#include "xbar/network.hpp"
#include "xbar/train.hpp"

namespace xbar {

// Complete description of one experiment: task, physical operating points,
// codec scales, network dimensions and array placement, optimizer settings.
// JSON keys carry units in their names so a misread scale shows up in review
// rather than in a conductance map.
struct ExperimentConfig {
    std::string task = "airline";  // "airline" | "gait-synthetic"
    std::uint64_t seed = 42;
    int epochs = 800;
    int batch_size = 1;

    DeviceParams device;
    NoiseModel noise;

    double g_per_w = 1e-4;       // siemens per unit weight
    double v_full_scale = 0.2;   // volts

    int crossbar_rows = 128;
    int crossbar_cols = 64;

    int input_dim = 1;
    int hidden_dim = 15;
    int output_dim = 1;
    bool lstm_bias = true;
    bool fc_bias = true;
    std::string fc_activation = "sigmoid";  // "sigmoid" | "softmax"

    Partition lstm_partition{0, 34, 0, 60};
    Partition fc_partition{0, 32, 60, 1};

    std::string optimizer = "sgdm";  // "sgdm" | "rmsprop"
    double alpha = 0.01;
    double eta = 0.9;
    double beta = 0.9;
    double epsilon = 1e-8;

    // uniform +-span initial weights; 0 picks 1/sqrt(fan-in)
    double init_weight_span = 0.0;
    // write-and-verify settings for the initial ex-situ load
    double init_program_tolerance = 1e-7;  // siemens
    int init_program_iters = 10;

    // airline task
    std::string airline_data_path;  // empty: bundled default
    double norm_band_lo = 0.0;
    double norm_band_hi = 0.8;
    // full-series gradient updates per epoch (the series is one sequence;
    // each update is a forward/backward/program cycle over all 95 steps)
    int updates_per_epoch = 1;

    // gait-synthetic task
    GaitGenConfig gait;

    // derived views
    LstmSpec lstm_spec() const;
    FcSpec fc_spec() const;
    WeightCodec weight_codec() const;
    VoltageCodec voltage_codec() const;
    OptimizerParams optimizer_params() const;
    OptimizerKind optimizer_kind() const;
    Task task_kind() const;
    std::string resolved_airline_path() const;

    std::string to_json() const;  // stable key order, parse round-trips
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    void save(const std::string& path) const;
};

ExperimentConfig preset_airline();
ExperimentConfig preset_gait_synthetic();
// Throws std::invalid_argument for unknown names.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

ValidationReport validate_config(const ExperimentConfig& cfg);

}  // namespace xbar
