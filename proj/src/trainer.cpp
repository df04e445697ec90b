#include "xbar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xbar {

namespace {

// reader-id blocks so no stream is ever shared between purposes
constexpr std::uint64_t kReaderTrainBase = 1u << 8;
constexpr std::uint64_t kReaderEvalBase = 1uLL << 48;

std::uint64_t train_reader_id(int epoch, int batch, int sample) {
    return kReaderTrainBase +
           mix64((static_cast<std::uint64_t>(epoch) << 40) ^
                 (static_cast<std::uint64_t>(batch) << 20) ^ static_cast<std::uint64_t>(sample));
}

}  // namespace

FloatStore::FloatStore(const LstmSpec& lstm_spec, const FcSpec& fc_spec)
    : lstm_(lstm_spec.stacked_rows(), lstm_spec.stacked_cols(), 0.0),
      fc_(fc_spec.stacked_rows(), fc_spec.output_dim, 0.0) {}

EnginePair FloatStore::engines(std::uint64_t) const {
    EnginePair pair;
    pair.lstm = std::make_unique<DenseMatVec>(&lstm_);
    pair.fc = std::make_unique<DenseMatVec>(&fc_);
    return pair;
}

void FloatStore::load_weights(const Matrix& lstm_w, const Matrix& fc_w) {
    lstm_.require_same_shape(lstm_w);
    fc_.require_same_shape(fc_w);
    lstm_ = lstm_w;
    fc_ = fc_w;
}

void FloatStore::apply_update(const GradientSet& update) {
    lstm_ += update.lstm;
    fc_ += update.fc;
}

CrossbarStore::CrossbarStore(Crossbar* xbar, LayerMapping lstm_map, LayerMapping fc_map,
                             WeightCodec wc, VoltageCodec vc, double program_tolerance,
                             int program_iters)
    : xbar_(xbar),
      lstm_map_(std::move(lstm_map)),
      fc_map_(std::move(fc_map)),
      wc_(wc),
      vc_(vc),
      program_tolerance_(program_tolerance),
      program_iters_(program_iters) {
    if (lstm_map_.partition.overlaps(fc_map_.partition))
        throw std::invalid_argument("crossbar store: layer partitions overlap");
}

EnginePair CrossbarStore::engines(std::uint64_t reader_id) const {
    EnginePair pair;
    auto lstm = std::make_unique<CrossbarMatVec>(xbar_, lstm_map_, wc_, vc_);
    auto fc = std::make_unique<CrossbarMatVec>(xbar_, fc_map_, wc_, vc_);
    if (xbar_->noise().read_noise_rel > 0.0) {
        lstm->set_noise_stream(NoiseStream(xbar_->seed(), 2 * reader_id));
        fc->set_noise_stream(NoiseStream(xbar_->seed(), 2 * reader_id + 1));
    }
    pair.lstm = std::move(lstm);
    pair.fc = std::move(fc);
    return pair;
}

void CrossbarStore::load_weights(const Matrix& lstm_w, const Matrix& fc_w) {
    program_mapped_weights(*xbar_, lstm_map_, wc_, lstm_w, program_tolerance_, program_iters_);
    program_mapped_weights(*xbar_, fc_map_, wc_, fc_w, program_tolerance_, program_iters_);
}

void CrossbarStore::apply_update(const GradientSet& update) {
    insitu_update(*xbar_, lstm_map_, wc_, update.lstm);
    insitu_update(*xbar_, fc_map_, wc_, update.fc);
}

Matrix CrossbarStore::lstm_weights() const {
    return decode_mapped_weights(*xbar_, lstm_map_, wc_);
}

Matrix CrossbarStore::fc_weights() const { return decode_mapped_weights(*xbar_, fc_map_, wc_); }

void initialize_weights(const ExperimentConfig& cfg, ParameterStore& store) {
    const LstmSpec lstm = cfg.lstm_spec();
    const FcSpec fc = cfg.fc_spec();
    const double w_max = cfg.weight_codec().max_weight();
    auto span_for = [&](int fan_in) {
        const double span =
            cfg.init_weight_span > 0.0 ? cfg.init_weight_span : 1.0 / std::sqrt(fan_in);
        return std::min(span, 0.9 * w_max);
    };
    Rng rng(derive_seed(cfg.seed, 0x1712));
    auto fill = [&](int rows, int cols, double span) {
        Matrix m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-span, span);
        return m;
    };
    const Matrix lstm_w =
        fill(lstm.stacked_rows(), lstm.stacked_cols(), span_for(lstm.stacked_rows()));
    const Matrix fc_w = fill(fc.stacked_rows(), fc.output_dim, span_for(fc.stacked_rows()));
    store.load_weights(lstm_w, fc_w);
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson: need two equal-length series");
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// --- airline ---------------------------------------------------------------------

namespace {

// One-step-ahead pass over the full series with the current parameters.
std::vector<double> predict_series(const ExperimentConfig& cfg, const AirlineSeries& series,
                                   const Normalization& norm, const ParameterStore& store,
                                   std::uint64_t reader_id) {
    const LstmSpec lstm_spec = cfg.lstm_spec();
    const FcSpec fc_spec = cfg.fc_spec();
    EnginePair engines = store.engines(reader_id);
    std::vector<Vector> inputs;
    inputs.reserve(series.values.size() - 1);
    for (std::size_t t = 0; t + 1 < series.values.size(); ++t)
        inputs.push_back({norm.normalize(series.values[t])});
    ForwardResult fwd =
        sequence_forward(lstm_spec, fc_spec, *engines.lstm, *engines.fc, inputs);
    std::vector<double> pred;
    pred.reserve(fwd.outputs.size());
    for (const Vector& y : fwd.outputs) pred.push_back(norm.denormalize(y[0]));
    return pred;
}

double test_rmse(const AirlineSeries& series, const std::vector<double>& predictions) {
    double acc = 0.0;
    int n = 0;
    for (int t = AirlineSeries::kTrain - 1; t + 1 < AirlineSeries::kLength; ++t) {
        const double err = predictions[t] - series.values[t + 1];
        acc += err * err;
        ++n;
    }
    return std::sqrt(acc / n);
}

}  // namespace

RegressionRun train_airline(const ExperimentConfig& cfg, const AirlineSeries& series,
                            ParameterStore& store, bool /*parallel*/) {
    const LstmSpec lstm_spec = cfg.lstm_spec();
    const FcSpec fc_spec = cfg.fc_spec();
    const RegressionPairs pairs =
        make_regression_pairs(series, cfg.norm_band_lo, cfg.norm_band_hi);
    const int T = static_cast<int>(pairs.inputs.size());

    RegressionRun run;
    run.actuals = series.values;
    if (cfg.epochs > 0) initialize_weights(cfg, store);

    OptimizerState opt = OptimizerState::zero(lstm_spec, fc_spec);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int b = 0; b < cfg.updates_per_epoch; ++b) {
            EnginePair engines = store.engines(train_reader_id(epoch, b, 0));
            ForwardResult fwd =
                sequence_forward(lstm_spec, fc_spec, *engines.lstm, *engines.fc, pairs.inputs);
            const double loss = loss_mse_sequence(fwd.outputs, pairs.targets);
            std::vector<Vector> deltas(fwd.outputs.size());
            for (int t = 0; t < T; ++t)
                deltas[t] =
                    output_delta(Task::Regression, fwd.outputs[t], pairs.targets[t], t + 1, T);
            GradientSet grads =
                bptt(lstm_spec, fc_spec, *engines.lstm, *engines.fc, fwd.cache, deltas);
            const GradientSet update = cfg.optimizer_kind() == OptimizerKind::Rmsprop
                                           ? rmsprop_step(opt, cfg.optimizer_params(), grads)
                                           : sgdm_step(opt, cfg.optimizer_params(), grads);
            store.apply_update(update);
            run.log.batches.push_back({epoch, b, loss});
        }

        const std::vector<double> pred =
            predict_series(cfg, series, pairs.norm, store, kReaderEvalBase + epoch);
        run.log.epochs.push_back({epoch, test_rmse(series, pred)});
    }

    run.predictions = predict_series(cfg, series, pairs.norm, store, kReaderEvalBase);
    run.test_rmse = test_rmse(series, run.predictions);
    std::vector<double> pred_test, actual_test;
    for (int t = AirlineSeries::kTrain - 1; t + 1 < AirlineSeries::kLength; ++t) {
        pred_test.push_back(run.predictions[t]);
        actual_test.push_back(series.values[t + 1]);
    }
    run.test_pearson = pearson_correlation(pred_test, actual_test);
    return run;
}

// --- gait ------------------------------------------------------------------------

namespace {

struct SampleResult {
    GradientSet grads;
    double loss = 0.0;
};

SampleResult gait_sample_pass(const ExperimentConfig& cfg, const LstmSpec& lstm_spec,
                              const FcSpec& fc_spec, const GaitSequence& seq,
                              const ParameterStore& store, std::uint64_t reader_id) {
    EnginePair engines = store.engines(reader_id);
    ForwardResult fwd =
        sequence_forward(lstm_spec, fc_spec, *engines.lstm, *engines.fc, seq.frames);
    const int T = static_cast<int>(seq.frames.size());
    Vector onehot(cfg.output_dim, 0.0);
    onehot[seq.label] = 1.0;
    SampleResult result;
    result.loss = loss_crossentropy_final(fwd.outputs.back(), onehot);
    std::vector<Vector> deltas(fwd.outputs.size());
    for (int t = 0; t < T; ++t)
        deltas[t] = output_delta(Task::Classification, fwd.outputs[t], onehot, t + 1, T);
    result.grads = bptt(lstm_spec, fc_spec, *engines.lstm, *engines.fc, fwd.cache, deltas);
    return result;
}

}  // namespace

double evaluate_gait_accuracy(const ExperimentConfig& cfg, const std::vector<GaitSequence>& seqs,
                              const ParameterStore& store, std::uint64_t reader_base,
                              bool parallel, std::vector<int>* predicted) {
    const LstmSpec lstm_spec = cfg.lstm_spec();
    const FcSpec fc_spec = cfg.fc_spec();
    const int n = static_cast<int>(seqs.size());
    std::vector<int> pred(n, -1);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int i = 0; i < n; ++i) {
        EnginePair engines = store.engines(reader_base + i);
        ForwardResult fwd =
            sequence_forward(lstm_spec, fc_spec, *engines.lstm, *engines.fc, seqs[i].frames);
        pred[i] = classify_final_step(fwd.outputs);
    }
    int correct = 0;
    for (int i = 0; i < n; ++i) correct += pred[i] == seqs[i].label;
    if (predicted) *predicted = std::move(pred);
    return n > 0 ? static_cast<double>(correct) / n : 0.0;
}

ClassificationRun train_gait(const ExperimentConfig& cfg, const GaitDataset& data,
                             ParameterStore& store, bool parallel) {
    const LstmSpec lstm_spec = cfg.lstm_spec();
    const FcSpec fc_spec = cfg.fc_spec();
    ClassificationRun run;
    for (const GaitSequence& s : data.test) run.actual.push_back(s.label);
    if (cfg.epochs > 0) initialize_weights(cfg, store);

    OptimizerState opt = OptimizerState::zero(lstm_spec, fc_spec);
    std::vector<int> order(data.train.size());
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(derive_seed(cfg.seed, 0xE70C + epoch));
        shuffle(order, shuffle_rng);

        const int n_train = static_cast<int>(order.size());
        int batch_index = 0;
        for (int start = 0; start < n_train; start += cfg.batch_size, ++batch_index) {
            const int count = std::min(cfg.batch_size, n_train - start);
            std::vector<SampleResult> results(count);
#pragma omp parallel for schedule(dynamic) if (parallel)
            for (int s = 0; s < count; ++s) {
                const GaitSequence& seq = data.train[order[start + s]];
                results[s] = gait_sample_pass(cfg, lstm_spec, fc_spec, seq, store,
                                              train_reader_id(epoch, batch_index, s));
            }
            // fixed-order reduction keeps results independent of scheduling
            GradientSet grads = GradientSet::zero(lstm_spec, fc_spec);
            double loss_sum = 0.0;
            for (int s = 0; s < count; ++s) {
                grads += results[s].grads;
                loss_sum += results[s].loss;
            }
            const GradientSet update = cfg.optimizer_kind() == OptimizerKind::Rmsprop
                                           ? rmsprop_step(opt, cfg.optimizer_params(), grads)
                                           : sgdm_step(opt, cfg.optimizer_params(), grads);
            store.apply_update(update);
            run.log.batches.push_back({epoch, batch_index, loss_sum / count});
        }

        const double acc = evaluate_gait_accuracy(
            cfg, data.test, store, kReaderEvalBase + static_cast<std::uint64_t>(epoch) * (1u << 20),
            parallel, epoch == cfg.epochs ? &run.predicted : nullptr);
        run.log.epochs.push_back({epoch, acc});
        if (acc > run.best_accuracy) {
            run.best_accuracy = acc;
            run.best_epoch = epoch;
        }
        run.final_accuracy = acc;
    }
    return run;
}

}  // namespace xbar
