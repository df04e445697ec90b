#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbar/matrix.hpp"
#include "xbar/network.hpp"

namespace xbar {

enum class Task { Regression, Classification };

// Accumulated parameter gradients, in the same stacked orientation as the
// parameters themselves (gate blocks live in the column ranges of `lstm`).
struct GradientSet {
    Matrix lstm;  // stacked_rows x 4*hidden
    Matrix fc;    // fc stacked_rows x outputs

    static GradientSet zero(const LstmSpec& lstm_spec, const FcSpec& fc_spec);
    GradientSet& operator+=(const GradientSet& other);
};

// Per-step deltas, retained for inspection when a trace is requested.
struct DeltaWorkspace {
    Vector dy_hat;
    Vector dh;
    Vector do_hat;
    Vector dc_hat;
    Vector da_hat;
    Vector di_hat;
    Vector df_hat;
    Vector dx;
    Vector dh_prev;
};

// Sum-over-steps mean squared error, 0.5 * ||y - target||^2 / T per step.
double loss_mse_sequence(const std::vector<Vector>& outputs, const std::vector<Vector>& targets);

// Cross entropy of the final-step distribution against a one-hot target.
double loss_crossentropy_final(const Vector& y_final, const Vector& target_onehot);

// Loss gradient with respect to the FC pre-activation at step t (1-based,
// sequence length T). Regression: (y-target)*y*(1-y), the gradient of the
// summed per-step squared error through the sigmoid head (the reported loss
// additionally averages over T). Classification: y-target at t = T, zero
// otherwise.
Vector output_delta(Task task, const Vector& y, const Vector& target, int t, int T);

// Reverse sweep over a cached forward pass. The two matrix-vector products
// against transposed parameters (FC backward and the stacked LSTM backward)
// go through the engines, so a crossbar-backed engine runs them as transposed
// array reads. Returns gradients summed over all steps.
GradientSet bptt(const LstmSpec& lstm_spec, const FcSpec& fc_spec, const MatVec& lstm_engine,
                 const MatVec& fc_engine, const SequenceCache& cache,
                 const std::vector<Vector>& output_deltas,
                 std::vector<DeltaWorkspace>* trace = nullptr);

// --- optimizers --------------------------------------------------------------

struct OptimizerParams {
    double alpha = 0.01;    // learning rate
    double eta = 0.0;       // momentum
    double beta = 0.9;      // RMS decay
    double epsilon = 1e-8;  // RMS denominator shift
};

enum class OptimizerKind { Sgdm, Rmsprop };

struct OptimizerState {
    Matrix velocity_lstm, velocity_fc;  // running update magnitude
    Matrix ms_lstm, ms_fc;              // running mean square (RMSprop)

    static OptimizerState zero(const LstmSpec& lstm_spec, const FcSpec& fc_spec);
};

// velocity <- eta * velocity + alpha * grad; update = -velocity.
void sgdm_update(Matrix& velocity, const Matrix& grad, const OptimizerParams& p, Matrix& update);

// ms <- beta * ms + (1-beta) * grad^2;
// velocity <- eta * velocity + alpha * grad / (sqrt(ms) + epsilon); update = -velocity.
void rmsprop_update(Matrix& ms, Matrix& velocity, const Matrix& grad, const OptimizerParams& p,
                    Matrix& update);

GradientSet sgdm_step(OptimizerState& state, const OptimizerParams& p, const GradientSet& grad);
GradientSet rmsprop_step(OptimizerState& state, const OptimizerParams& p, const GradientSet& grad);

// --- in-situ update ----------------------------------------------------------

// Reads the mapped weights back from the array, adds delta_w, and programs the
// partition with the re-encoded differential targets (clamped to range).
ProgramReport insitu_update(Crossbar& xbar, const LayerMapping& map, const WeightCodec& codec,
                            const Matrix& delta_w);

// --- training log ------------------------------------------------------------

struct TrainingLog {
    struct BatchRecord {
        int epoch = 0;
        int batch = 0;
        double loss = 0.0;  // mean per sample
    };
    struct EpochRecord {
        int epoch = 0;
        double test_metric = 0.0;
    };

    std::vector<BatchRecord> batches;
    std::vector<EpochRecord> epochs;

    void save(const std::string& path) const;
    static TrainingLog load(const std::string& path);
};

}  // namespace xbar
