#pragma once

#include <memory>
#include <vector>

#include "xbar/config.hpp"
#include "xbar/data.hpp"
#include "xbar/device.hpp"
#include "xbar/network.hpp"
#include "xbar/train.hpp"

namespace xbar {

struct EnginePair {
    std::unique_ptr<MatVec> lstm;
    std::unique_ptr<MatVec> fc;
};

// Where the parameters live. The float store is the conventional software
// baseline; the crossbar store keeps them as differential conductances and
// turns updates into programming pulses. Engines are cheap per-reader views:
// each concurrent sample gets its own pair so noisy reads stay independent
// and reproducible.
class ParameterStore {
public:
    virtual ~ParameterStore() = default;
    virtual EnginePair engines(std::uint64_t reader_id) const = 0;
    virtual void load_weights(const Matrix& lstm_w, const Matrix& fc_w) = 0;
    virtual void apply_update(const GradientSet& update) = 0;
    virtual Matrix lstm_weights() const = 0;
    virtual Matrix fc_weights() const = 0;
};

class FloatStore : public ParameterStore {
public:
    FloatStore(const LstmSpec& lstm_spec, const FcSpec& fc_spec);
    EnginePair engines(std::uint64_t reader_id) const override;
    void load_weights(const Matrix& lstm_w, const Matrix& fc_w) override;
    void apply_update(const GradientSet& update) override;
    Matrix lstm_weights() const override { return lstm_; }
    Matrix fc_weights() const override { return fc_; }

private:
    Matrix lstm_, fc_;
};

class CrossbarStore : public ParameterStore {
public:
    CrossbarStore(Crossbar* xbar, LayerMapping lstm_map, LayerMapping fc_map, WeightCodec wc,
                  VoltageCodec vc, double program_tolerance, int program_iters);
    EnginePair engines(std::uint64_t reader_id) const override;
    void load_weights(const Matrix& lstm_w, const Matrix& fc_w) override;
    void apply_update(const GradientSet& update) override;
    Matrix lstm_weights() const override;
    Matrix fc_weights() const override;

    const LayerMapping& lstm_mapping() const { return lstm_map_; }
    const LayerMapping& fc_mapping() const { return fc_map_; }

private:
    Crossbar* xbar_;
    LayerMapping lstm_map_, fc_map_;
    WeightCodec wc_;
    VoltageCodec vc_;
    double program_tolerance_;
    int program_iters_;
};

// Seeded uniform(-span, span) initial weights; span 0 picks 1/sqrt(fan-in)
// capped safely inside the representable weight range.
void initialize_weights(const ExperimentConfig& cfg, ParameterStore& store);

// --- task runs -----------------------------------------------------------------

struct RegressionRun {
    TrainingLog log;
    std::vector<double> predictions;  // denormalized, one per input month
    std::vector<double> actuals;      // the raw series
    double test_rmse = 0.0;           // final-model RMSE on the test months
    double test_pearson = 0.0;        // final-model correlation on the test months
};

// One pass per epoch over the training split as a single 95-step sequence.
RegressionRun train_airline(const ExperimentConfig& cfg, const AirlineSeries& series,
                            ParameterStore& store, bool parallel = true);

struct ClassificationRun {
    TrainingLog log;
    std::vector<int> predicted;  // final-epoch test predictions
    std::vector<int> actual;
    double final_accuracy = 0.0;
    double best_accuracy = 0.0;
    int best_epoch = 0;
};

// Shuffled mini-batches; samples within a batch run in parallel and their
// gradients are reduced in sample order, so results do not depend on the
// thread count.
ClassificationRun train_gait(const ExperimentConfig& cfg, const GaitDataset& data,
                             ParameterStore& store, bool parallel = true);

double evaluate_gait_accuracy(const ExperimentConfig& cfg, const std::vector<GaitSequence>& seqs,
                              const ParameterStore& store, std::uint64_t reader_base,
                              bool parallel, std::vector<int>* predicted = nullptr);

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace xbar
