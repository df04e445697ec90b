#include "xbar/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#ifndef XBAR_DATA_DIR
#define XBAR_DATA_DIR "data"
#endif

namespace xbar {

using nlohmann::json;

LstmSpec ExperimentConfig::lstm_spec() const { return LstmSpec{input_dim, hidden_dim, lstm_bias}; }

FcSpec ExperimentConfig::fc_spec() const {
    const FcActivation act =
        fc_activation == "softmax" ? FcActivation::Softmax : FcActivation::Sigmoid;
    return FcSpec{hidden_dim, output_dim, fc_bias, act};
}

WeightCodec ExperimentConfig::weight_codec() const {
    return WeightCodec{g_per_w, device.g_max(), v_full_scale};
}

VoltageCodec ExperimentConfig::voltage_codec() const {
    return VoltageCodec{v_full_scale, -1.0, 1.0};
}

OptimizerParams ExperimentConfig::optimizer_params() const {
    return OptimizerParams{alpha, eta, beta, epsilon};
}

OptimizerKind ExperimentConfig::optimizer_kind() const {
    return optimizer == "rmsprop" ? OptimizerKind::Rmsprop : OptimizerKind::Sgdm;
}

Task ExperimentConfig::task_kind() const {
    return task == "gait-synthetic" ? Task::Classification : Task::Regression;
}

std::string ExperimentConfig::resolved_airline_path() const {
    if (!airline_data_path.empty()) return airline_data_path;
    return std::string(XBAR_DATA_DIR) + "/airline_passengers.txt";
}

namespace {

json partition_to_json(const Partition& p) {
    return json{{"row_start", p.row_start},
                {"row_count", p.row_count},
                {"col_start", p.col_start},
                {"col_count", p.col_count}};
}

Partition partition_from_json(const json& j) {
    Partition p;
    p.row_start = j.at("row_start").get<int>();
    p.row_count = j.at("row_count").get<int>();
    p.col_start = j.at("col_start").get<int>();
    p.col_count = j.at("col_count").get<int>();
    return p;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

}  // namespace

std::string ExperimentConfig::to_json() const {
    json j;
    j["task"] = task;
    j["seed"] = seed;
    j["epochs"] = epochs;
    j["batch_size"] = batch_size;
    j["device"] = {
        {"v_set_volts", device.v_set},
        {"v_reset_volts", device.v_reset},
        {"v_read_volts", device.v_read},
        {"v_gate0_volts", device.v_gate0},
        {"v_gate_max_volts", device.v_gate_max},
        {"v_gate_min_volts", device.v_gate_min},
        {"v_gate_reset_volts", device.v_gate_reset},
        {"dvgate_per_dg_volts_per_siemens", device.dvgate_per_dg},
        {"g_max_siemens", device.g_max_override},
        {"wire_resistance_ohms", device.wire_resistance},
    };
    j["noise"] = {
        {"read_noise_rel", noise.read_noise_rel},
        {"program_noise_abs_siemens", noise.program_noise_abs},
        {"quantization_levels", noise.quantization_levels},
    };
    j["codec"] = {
        {"g_per_w_siemens_per_weight", g_per_w},
        {"v_full_scale_volts", v_full_scale},
    };
    j["crossbar"] = {{"rows", crossbar_rows}, {"cols", crossbar_cols}};
    j["network"] = {
        {"input_dim", input_dim},
        {"hidden_dim", hidden_dim},
        {"output_dim", output_dim},
        {"lstm_bias", lstm_bias},
        {"fc_bias", fc_bias},
        {"fc_activation", fc_activation},
        {"lstm_partition", partition_to_json(lstm_partition)},
        {"fc_partition", partition_to_json(fc_partition)},
    };
    j["optimizer"] = {
        {"kind", optimizer}, {"alpha", alpha}, {"eta", eta}, {"beta", beta}, {"epsilon", epsilon},
    };
    j["init"] = {
        {"weight_span", init_weight_span},
        {"program_tolerance_siemens", init_program_tolerance},
        {"program_iters", init_program_iters},
    };
    j["airline"] = {
        {"data_path", airline_data_path},
        {"norm_band_lo", norm_band_lo},
        {"norm_band_hi", norm_band_hi},
        {"updates_per_epoch", updates_per_epoch},
    };
    j["gait"] = {
        {"n_classes", gait.n_classes},
        {"videos_per_class", gait.videos_per_class},
        {"frames_per_video", gait.frames_per_video},
        {"scale_jitter", gait.scale_jitter},
        {"shape_jitter", gait.shape_jitter},
        {"period_jitter", gait.period_jitter},
        {"width_noise", gait.width_noise},
        {"train_fraction", gait.train_fraction},
        {"feature_gain", gait.feature_gain},
    };
    return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: parse failure: ") + e.what());
    }
    check_keys(j, {"task", "seed", "epochs", "batch_size", "device", "noise", "codec", "crossbar",
                   "network", "optimizer", "init", "airline", "gait"},
               "top level");
    ExperimentConfig cfg;
    cfg.task = j.value("task", cfg.task);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    if (j.contains("device")) {
        const json& d = j["device"];
        check_keys(d,
                   {"v_set_volts", "v_reset_volts", "v_read_volts", "v_gate0_volts",
                    "v_gate_max_volts", "v_gate_min_volts", "v_gate_reset_volts",
                    "dvgate_per_dg_volts_per_siemens", "g_max_siemens", "wire_resistance_ohms"},
                   "device");
        cfg.device.v_set = d.value("v_set_volts", cfg.device.v_set);
        cfg.device.v_reset = d.value("v_reset_volts", cfg.device.v_reset);
        cfg.device.v_read = d.value("v_read_volts", cfg.device.v_read);
        cfg.device.v_gate0 = d.value("v_gate0_volts", cfg.device.v_gate0);
        cfg.device.v_gate_max = d.value("v_gate_max_volts", cfg.device.v_gate_max);
        cfg.device.v_gate_min = d.value("v_gate_min_volts", cfg.device.v_gate_min);
        cfg.device.v_gate_reset = d.value("v_gate_reset_volts", cfg.device.v_gate_reset);
        cfg.device.dvgate_per_dg =
            d.value("dvgate_per_dg_volts_per_siemens", cfg.device.dvgate_per_dg);
        cfg.device.g_max_override = d.value("g_max_siemens", cfg.device.g_max_override);
        cfg.device.wire_resistance = d.value("wire_resistance_ohms", cfg.device.wire_resistance);
    }
    if (j.contains("noise")) {
        const json& nz = j["noise"];
        check_keys(nz, {"read_noise_rel", "program_noise_abs_siemens", "quantization_levels"},
                   "noise");
        cfg.noise.read_noise_rel = nz.value("read_noise_rel", cfg.noise.read_noise_rel);
        cfg.noise.program_noise_abs =
            nz.value("program_noise_abs_siemens", cfg.noise.program_noise_abs);
        cfg.noise.quantization_levels =
            nz.value("quantization_levels", cfg.noise.quantization_levels);
    }
    if (j.contains("codec")) {
        const json& c = j["codec"];
        check_keys(c, {"g_per_w_siemens_per_weight", "v_full_scale_volts"}, "codec");
        cfg.g_per_w = c.value("g_per_w_siemens_per_weight", cfg.g_per_w);
        cfg.v_full_scale = c.value("v_full_scale_volts", cfg.v_full_scale);
    }
    if (j.contains("crossbar")) {
        const json& x = j["crossbar"];
        check_keys(x, {"rows", "cols"}, "crossbar");
        cfg.crossbar_rows = x.value("rows", cfg.crossbar_rows);
        cfg.crossbar_cols = x.value("cols", cfg.crossbar_cols);
    }
    if (j.contains("network")) {
        const json& n = j["network"];
        check_keys(n,
                   {"input_dim", "hidden_dim", "output_dim", "lstm_bias", "fc_bias",
                    "fc_activation", "lstm_partition", "fc_partition"},
                   "network");
        cfg.input_dim = n.value("input_dim", cfg.input_dim);
        cfg.hidden_dim = n.value("hidden_dim", cfg.hidden_dim);
        cfg.output_dim = n.value("output_dim", cfg.output_dim);
        cfg.lstm_bias = n.value("lstm_bias", cfg.lstm_bias);
        cfg.fc_bias = n.value("fc_bias", cfg.fc_bias);
        cfg.fc_activation = n.value("fc_activation", cfg.fc_activation);
        if (n.contains("lstm_partition")) cfg.lstm_partition = partition_from_json(n["lstm_partition"]);
        if (n.contains("fc_partition")) cfg.fc_partition = partition_from_json(n["fc_partition"]);
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        check_keys(o, {"kind", "alpha", "eta", "beta", "epsilon"}, "optimizer");
        cfg.optimizer = o.value("kind", cfg.optimizer);
        cfg.alpha = o.value("alpha", cfg.alpha);
        cfg.eta = o.value("eta", cfg.eta);
        cfg.beta = o.value("beta", cfg.beta);
        cfg.epsilon = o.value("epsilon", cfg.epsilon);
    }
    if (j.contains("init")) {
        const json& i = j["init"];
        check_keys(i, {"weight_span", "program_tolerance_siemens", "program_iters"}, "init");
        cfg.init_weight_span = i.value("weight_span", cfg.init_weight_span);
        cfg.init_program_tolerance =
            i.value("program_tolerance_siemens", cfg.init_program_tolerance);
        cfg.init_program_iters = i.value("program_iters", cfg.init_program_iters);
    }
    if (j.contains("airline")) {
        const json& a = j["airline"];
        check_keys(a, {"data_path", "norm_band_lo", "norm_band_hi", "updates_per_epoch"},
                   "airline");
        cfg.airline_data_path = a.value("data_path", cfg.airline_data_path);
        cfg.norm_band_lo = a.value("norm_band_lo", cfg.norm_band_lo);
        cfg.norm_band_hi = a.value("norm_band_hi", cfg.norm_band_hi);
        cfg.updates_per_epoch = a.value("updates_per_epoch", cfg.updates_per_epoch);
    }
    if (j.contains("gait")) {
        const json& g = j["gait"];
        check_keys(g,
                   {"n_classes", "videos_per_class", "frames_per_video", "scale_jitter",
                    "shape_jitter", "period_jitter", "width_noise", "train_fraction",
                    "feature_gain"},
                   "gait");
        cfg.gait.n_classes = g.value("n_classes", cfg.gait.n_classes);
        cfg.gait.videos_per_class = g.value("videos_per_class", cfg.gait.videos_per_class);
        cfg.gait.frames_per_video = g.value("frames_per_video", cfg.gait.frames_per_video);
        cfg.gait.scale_jitter = g.value("scale_jitter", cfg.gait.scale_jitter);
        cfg.gait.shape_jitter = g.value("shape_jitter", cfg.gait.shape_jitter);
        cfg.gait.period_jitter = g.value("period_jitter", cfg.gait.period_jitter);
        cfg.gait.width_noise = g.value("width_noise", cfg.gait.width_noise);
        cfg.gait.train_fraction = g.value("train_fraction", cfg.gait.train_fraction);
        cfg.gait.feature_gain = g.value("feature_gain", cfg.gait.feature_gain);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void ExperimentConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << to_json();
    if (!out) throw std::runtime_error("write failed: " + path);
}

ExperimentConfig preset_airline() {
    ExperimentConfig cfg;
    cfg.task = "airline";
    cfg.seed = 2;
    cfg.epochs = 800;
    cfg.batch_size = 1;
    cfg.g_per_w = 1e-4;
    cfg.input_dim = 1;
    cfg.hidden_dim = 15;
    cfg.output_dim = 1;
    cfg.lstm_bias = true;
    cfg.fc_bias = true;
    cfg.fc_activation = "sigmoid";
    cfg.lstm_partition = Partition{0, 34, 0, 60};
    cfg.fc_partition = Partition{0, 32, 60, 1};
    cfg.optimizer = "sgdm";
    cfg.alpha = 0.01;
    cfg.eta = 0.9;
    cfg.updates_per_epoch = 11;
    return cfg;
}

ExperimentConfig preset_gait_synthetic() {
    ExperimentConfig cfg;
    cfg.task = "gait-synthetic";
    cfg.seed = 42;
    cfg.epochs = 50;
    cfg.batch_size = 50;
    cfg.g_per_w = 3e-4;
    cfg.input_dim = 50;
    cfg.hidden_dim = 14;
    cfg.output_dim = 8;
    cfg.lstm_bias = false;
    cfg.fc_bias = false;
    cfg.fc_activation = "softmax";
    cfg.lstm_partition = Partition{0, 128, 0, 56};
    cfg.fc_partition = Partition{0, 28, 56, 8};
    cfg.optimizer = "rmsprop";
    cfg.alpha = 0.01;
    cfg.eta = 0.0;
    cfg.beta = 0.9;
    cfg.epsilon = 1e-8;
    return cfg;
}

ExperimentConfig preset(const std::string& name) {
    if (name == "airline") return preset_airline();
    if (name == "gait-synthetic") return preset_gait_synthetic();
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"airline", "gait-synthetic"}; }

ValidationReport validate_config(const ExperimentConfig& cfg) {
    ValidationReport report;
    auto fail = [&](const std::string& msg) { report.violations.push_back(msg); };

    if (cfg.task != "airline" && cfg.task != "gait-synthetic")
        fail("task must be 'airline' or 'gait-synthetic'");
    if (cfg.epochs < 0) fail("epochs must be >= 0");
    if (cfg.batch_size < 1) fail("batch_size must be >= 1");

    if (!(cfg.device.v_gate_min < cfg.device.v_gate0 && cfg.device.v_gate0 <= cfg.device.v_gate_max))
        fail("device: require v_gate_min < v_gate0 <= v_gate_max");
    if (!(cfg.device.v_read < cfg.device.v_reset && cfg.device.v_reset < cfg.device.v_set))
        fail("device: require v_read < v_reset < v_set");
    if (!(cfg.device.dvgate_per_dg > 0.0)) fail("device: dvgate_per_dg must be positive");
    else if (!(cfg.device.g_max() > 0.0)) fail("device: g_max must be positive");

    if (cfg.noise.read_noise_rel < 0.0 || cfg.noise.program_noise_abs < 0.0)
        fail("noise: magnitudes must be >= 0");
    if (cfg.noise.quantization_levels != 0 && cfg.noise.quantization_levels < 2)
        fail("noise: quantization_levels must be 0 or >= 2");

    if (!(cfg.g_per_w > 0.0)) fail("codec: g_per_w must be positive");
    if (!(cfg.v_full_scale > 0.0)) fail("codec: v_full_scale must be positive");
    if (cfg.v_full_scale > cfg.device.v_read)
        fail("codec: v_full_scale exceeds the device read voltage");

    if (cfg.crossbar_rows < 1 || cfg.crossbar_cols < 1) fail("crossbar: size must be positive");
    if (cfg.input_dim < 1 || cfg.hidden_dim < 1 || cfg.output_dim < 1)
        fail("network: dimensions must be positive");
    if (cfg.fc_activation != "sigmoid" && cfg.fc_activation != "softmax")
        fail("network: fc_activation must be 'sigmoid' or 'softmax'");
    if (cfg.task == "airline" && cfg.fc_activation != "sigmoid")
        fail("network: the regression task requires the sigmoid output head");
    if (cfg.task == "gait-synthetic" && cfg.fc_activation != "softmax")
        fail("network: the classification task requires the softmax output head");

    auto check_partition = [&](const Partition& p, const std::string& name, int want_rows,
                               int want_cols) {
        if (p.row_start < 0 || p.col_start < 0 || p.row_count < 0 || p.col_count < 0 ||
            p.row_start + p.row_count > cfg.crossbar_rows ||
            p.col_start + p.col_count > cfg.crossbar_cols)
            fail("partition '" + name + "' does not fit inside the crossbar");
        if (p.row_count != want_rows)
            fail("partition '" + name + "' must have " + std::to_string(want_rows) + " rows, has " +
                 std::to_string(p.row_count));
        if (p.col_count != want_cols)
            fail("partition '" + name + "' must have " + std::to_string(want_cols) +
                 " cols, has " + std::to_string(p.col_count));
    };
    const LstmSpec lstm = cfg.lstm_spec();
    const FcSpec fc = cfg.fc_spec();
    check_partition(cfg.lstm_partition, "lstm", 2 * lstm.stacked_rows(), lstm.stacked_cols());
    check_partition(cfg.fc_partition, "fc", 2 * fc.stacked_rows(), fc.output_dim);
    if (cfg.lstm_partition.overlaps(cfg.fc_partition)) fail("partitions overlap");

    if (cfg.optimizer != "sgdm" && cfg.optimizer != "rmsprop")
        fail("optimizer: kind must be 'sgdm' or 'rmsprop'");
    if (!(cfg.alpha > 0.0)) fail("optimizer: alpha must be positive");
    if (cfg.eta < 0.0 || cfg.eta >= 1.0) fail("optimizer: eta must lie in [0, 1)");
    if (cfg.optimizer == "rmsprop") {
        if (cfg.beta < 0.0 || cfg.beta >= 1.0) fail("optimizer: beta must lie in [0, 1)");
        if (!(cfg.epsilon > 0.0)) fail("optimizer: epsilon must be positive");
    }

    if (cfg.init_weight_span < 0.0) fail("init: weight_span must be >= 0");
    if (!(cfg.init_program_tolerance > 0.0)) fail("init: program_tolerance must be positive");
    if (cfg.init_program_iters < 1) fail("init: program_iters must be >= 1");

    if (cfg.task == "airline") {
        if (!(cfg.norm_band_lo < cfg.norm_band_hi) || cfg.norm_band_lo < 0.0 ||
            cfg.norm_band_hi > 1.0)
            fail("airline: normalization band must satisfy 0 <= lo < hi <= 1");
        if (cfg.updates_per_epoch < 1) fail("airline: updates_per_epoch must be >= 1");
    }
    if (cfg.task == "gait-synthetic") {
        if (cfg.gait.n_classes < 2) fail("gait: n_classes must be >= 2");
        if (cfg.gait.n_classes != cfg.output_dim)
            fail("gait: n_classes must equal the network output dimension");
        if (cfg.gait.videos_per_class < 1 || cfg.gait.frames_per_video < GaitSequence::kFrames)
            fail("gait: generator sizes too small");
        if (!(cfg.gait.train_fraction > 0.0 && cfg.gait.train_fraction < 1.0))
            fail("gait: train_fraction must lie in (0, 1)");
        if (!(cfg.gait.feature_gain > 0.0)) fail("gait: feature_gain must be positive");
        if (cfg.gait.shape_jitter < 0.0 || cfg.gait.shape_jitter >= 0.5)
            fail("gait: shape_jitter must lie in [0, 0.5)");
    }
    return report;
}

}  // namespace xbar
