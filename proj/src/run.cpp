#include "xbar/run.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "xbar/textio.hpp"

namespace xbar {

namespace fs = std::filesystem;

void export_maps(const Crossbar& xbar,
                 const std::vector<std::pair<std::string, LayerMapping>>& layers,
                 const WeightCodec& codec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (const auto& [name, mapping] : layers) {
        ValueMap gmap;
        gmap.rows = mapping.partition.row_count;
        gmap.cols = mapping.partition.col_count;
        gmap.units = "S";
        gmap.seed = xbar.seed();
        gmap.values = xbar.read_conductances(mapping.partition);
        save_value_map(out_dir + "/gmap_" + name + ".txt", gmap);

        ValueMap wmap;
        wmap.rows = mapping.logical_rows();
        wmap.cols = mapping.out_cols;
        wmap.units = "weight";
        wmap.seed = xbar.seed();
        wmap.values = decode_mapped_weights(xbar, mapping, codec);
        save_value_map(out_dir + "/wmap_" + name + ".txt", wmap);
    }
}

void save_state(const std::string& path, const std::string& task, const Crossbar& xbar) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "task " << task << "\n";
    ValueMap map;
    map.rows = xbar.rows();
    map.cols = xbar.cols();
    map.units = "S";
    map.seed = xbar.seed();
    map.values = xbar.read_conductances(xbar.full());
    write_value_map(out, map);
    if (!out) throw std::runtime_error("write failed: " + path);
}

CrossbarState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    CrossbarState state;
    std::string key;
    if (!(in >> key >> state.task) || key != "task")
        throw std::runtime_error("state file: missing task header in " + path);
    state.map = read_value_map(in);
    return state;
}

namespace {

std::vector<std::pair<std::string, LayerMapping>> layer_mappings(const ExperimentConfig& cfg) {
    return {{"lstm", LayerMapping::lstm(cfg.lstm_partition, cfg.lstm_spec())},
            {"fc", LayerMapping::fc(cfg.fc_partition, cfg.fc_spec())}};
}

void write_metrics_csv(const std::string& path, const TrainingLog& log,
                       const std::string& metric_name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "epoch,train_loss," << metric_name << "\n";
    // mean batch loss per epoch alongside the test metric
    std::size_t bi = 0;
    for (const auto& er : log.epochs) {
        double loss_sum = 0.0;
        int n = 0;
        while (bi < log.batches.size() && log.batches[bi].epoch == er.epoch) {
            loss_sum += log.batches[bi].loss;
            ++n;
            ++bi;
        }
        out << er.epoch << ',' << format_double(n ? loss_sum / n : 0.0) << ','
            << format_double(er.test_metric) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void run_airline(const ExperimentConfig& cfg, const std::string& out_dir,
                 const RunOptions& options, Crossbar& xbar, CrossbarStore& store) {
    const AirlineSeries series = load_airline(cfg.resolved_airline_path());
    if (cfg.epochs == 0) return;

    RegressionRun run = train_airline(cfg, series, store, options.parallel);
    run.log.save(out_dir + "/training_log.txt");
    write_metrics_csv(out_dir + "/metrics.csv", run.log, "test_rmse");

    std::ofstream pred(out_dir + "/predictions.txt");
    pred << "# month predicted actual\n";
    for (std::size_t t = 0; t < run.predictions.size(); ++t)
        pred << (t + 2) << ' ' << format_double(run.predictions[t]) << ' '
             << format_double(series.values[t + 1]) << "\n";
    pred.close();

    std::ofstream summary(out_dir + "/summary.txt");
    summary << "task airline\n";
    summary << "epochs " << cfg.epochs << "\n";
    summary << "seed " << cfg.seed << "\n";
    summary << "first_epoch_loss " << format_double(run.log.batches.front().loss) << "\n";
    summary << "final_epoch_loss " << format_double(run.log.batches.back().loss) << "\n";
    summary << "test_rmse " << format_double(run.test_rmse) << "\n";
    summary << "test_pearson " << format_double(run.test_pearson) << "\n";
}

void run_gait(const ExperimentConfig& cfg, const std::string& out_dir, const RunOptions& options,
              Crossbar& xbar, CrossbarStore& store) {
    const GaitDataset data = synth_gait_dataset(cfg.seed, cfg.gait);
    if (options.export_dataset) {
        save_sequences(out_dir + "/dataset_train.txt", data.train);
        save_sequences(out_dir + "/dataset_test.txt", data.test);
    }
    if (cfg.epochs == 0) return;

    ClassificationRun run = train_gait(cfg, data, store, options.parallel);
    run.log.save(out_dir + "/training_log.txt");
    write_metrics_csv(out_dir + "/metrics.csv", run.log, "test_accuracy");

    std::ofstream report(out_dir + "/accuracy_report.txt");
    for (const auto& er : run.log.epochs)
        report << "epoch " << er.epoch << " accuracy " << format_double(er.test_metric) << "\n";
    report << "best_epoch " << run.best_epoch << "\n";
    report << "best_accuracy " << format_double(run.best_accuracy) << "\n";
    report << "final_accuracy " << format_double(run.final_accuracy) << "\n";
    std::vector<int> correct(cfg.output_dim, 0), total(cfg.output_dim, 0);
    for (std::size_t i = 0; i < run.actual.size(); ++i) {
        total[run.actual[i]] += 1;
        correct[run.actual[i]] += run.predicted[i] == run.actual[i];
    }
    for (int c = 0; c < cfg.output_dim; ++c)
        report << "class " << c << " correct " << correct[c] << " total " << total[c] << "\n";
    report.close();

    std::ofstream summary(out_dir + "/summary.txt");
    summary << "task gait-synthetic\n";
    summary << "epochs " << cfg.epochs << "\n";
    summary << "seed " << cfg.seed << "\n";
    summary << "train_sequences " << data.train.size() << "\n";
    summary << "test_sequences " << data.test.size() << "\n";
    summary << "best_epoch " << run.best_epoch << "\n";
    summary << "best_accuracy " << format_double(run.best_accuracy) << "\n";
    summary << "final_accuracy " << format_double(run.final_accuracy) << "\n";
}

}  // namespace

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    const RunOptions& options) {
    const ValidationReport report = validate_config(cfg);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "invalid configuration:";
        for (const std::string& v : report.violations) msg << "\n  - " << v;
        throw std::invalid_argument(msg.str());
    }
    fs::create_directories(out_dir);

    Crossbar xbar(cfg.crossbar_rows, cfg.crossbar_cols, cfg.device, cfg.noise, cfg.seed);
    xbar.init_array();
    auto layers = layer_mappings(cfg);
    CrossbarStore store(&xbar, layers[0].second, layers[1].second, cfg.weight_codec(),
                        cfg.voltage_codec(), cfg.init_program_tolerance, cfg.init_program_iters);

    if (cfg.task == "airline")
        run_airline(cfg, out_dir, options, xbar, store);
    else
        run_gait(cfg, out_dir, options, xbar, store);

    // final (or initial, for epochs=0) array state
    export_maps(xbar, layers, cfg.weight_codec(), out_dir);
    save_state(out_dir + "/state.txt", cfg.task, xbar);
    cfg.save(out_dir + "/config.json");
}

}  // namespace xbar
