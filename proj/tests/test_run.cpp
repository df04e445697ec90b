#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xbar/run.hpp"

using namespace xbar;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ExperimentConfig small_gait(int epochs) {
    ExperimentConfig cfg = preset_gait_synthetic();
    cfg.gait.videos_per_class = 2;
    cfg.epochs = epochs;
    cfg.batch_size = 8;
    return cfg;
}

}  // namespace

TEST_CASE("zero-epoch run emits the initial maps only") {
    TempDir dir("xbar_run_zero");
    ExperimentConfig cfg = preset_airline();
    cfg.epochs = 0;
    run_experiment(cfg, dir.str());
    CHECK(fs::exists(dir.path / "gmap_lstm.txt"));
    CHECK(fs::exists(dir.path / "gmap_fc.txt"));
    CHECK(fs::exists(dir.path / "state.txt"));
    CHECK_FALSE(fs::exists(dir.path / "predictions.txt"));
    CHECK_FALSE(fs::exists(dir.path / "training_log.txt"));

    // post-init, noise-free: the conductance map is all zeros
    const ValueMap map = load_value_map((dir.path / "gmap_lstm.txt").string());
    CHECK(map.rows == 34);
    CHECK(map.cols == 60);
    CHECK(max_abs(map.values) == 0.0);
}

TEST_CASE("short runs are byte-identical across repeats and emit loadable artifacts") {
    ExperimentConfig cfg = small_gait(2);
    TempDir a("xbar_run_a"), b("xbar_run_b");
    RunOptions opts;
    opts.export_dataset = true;
    run_experiment(cfg, a.str(), opts);
    run_experiment(cfg, b.str(), opts);

    const char* files[] = {"training_log.txt", "metrics.csv",  "accuracy_report.txt",
                           "gmap_lstm.txt",    "gmap_fc.txt",  "wmap_lstm.txt",
                           "wmap_fc.txt",      "state.txt",    "summary.txt",
                           "config.json",      "dataset_train.txt"};
    for (const char* f : files) {
        INFO(f);
        REQUIRE(fs::exists(a.path / f));
        CHECK(read_file(a.path / f) == read_file(b.path / f));
    }

    // artifacts reload through their own readers
    const TrainingLog log = TrainingLog::load((a.path / "training_log.txt").string());
    CHECK(log.epochs.size() == 2);
    const CrossbarState state = load_state((a.path / "state.txt").string());
    CHECK(state.task == "gait-synthetic");
    CHECK(state.map.rows == 128);
    CHECK(state.map.cols == 64);
    const auto seqs = load_sequences((a.path / "dataset_train.txt").string());
    CHECK(!seqs.empty());
    const ExperimentConfig echoed =
        ExperimentConfig::load((a.path / "config.json").string());
    CHECK(echoed.to_json() == cfg.to_json());
}

TEST_CASE("different seeds change the artifacts") {
    ExperimentConfig cfg = small_gait(1);
    TempDir a("xbar_seed_a"), b("xbar_seed_b");
    run_experiment(cfg, a.str());
    cfg.seed = 43;
    run_experiment(cfg, b.str());
    CHECK(read_file(a.path / "gmap_lstm.txt") != read_file(b.path / "gmap_lstm.txt"));
}

TEST_CASE("export reproduces the maps from a saved state") {
    ExperimentConfig cfg = small_gait(1);
    TempDir run_dir("xbar_exp_run"), export_dir("xbar_exp_out");
    run_experiment(cfg, run_dir.str());

    const CrossbarState state = load_state((run_dir.path / "state.txt").string());
    ExperimentConfig pcfg = preset(state.task);
    Crossbar xb(state.map.rows, state.map.cols, pcfg.device, NoiseModel{}, state.map.seed);
    xb.restore_conductances(xb.full(), state.map.values);
    export_maps(xb,
                {{"lstm", LayerMapping::lstm(pcfg.lstm_partition, pcfg.lstm_spec())},
                 {"fc", LayerMapping::fc(pcfg.fc_partition, pcfg.fc_spec())}},
                pcfg.weight_codec(), export_dir.str());

    CHECK(read_file(run_dir.path / "gmap_lstm.txt") == read_file(export_dir.path / "gmap_lstm.txt"));
    CHECK(read_file(run_dir.path / "wmap_fc.txt") == read_file(export_dir.path / "wmap_fc.txt"));
}

TEST_CASE("invalid configurations abort before touching the filesystem") {
    TempDir dir("xbar_run_invalid");
    ExperimentConfig cfg = preset_airline();
    cfg.v_full_scale = 0.5;
    CHECK_THROWS_AS(run_experiment(cfg, (dir.path / "sub").string()), std::invalid_argument);
    CHECK_FALSE(fs::exists(dir.path / "sub"));
}
