#pragma once

#include <memory>
#include <string>
#include <vector>

#include "xbar/codec.hpp"
#include "xbar/device.hpp"
#include "xbar/matrix.hpp"

namespace xbar {

// Parameters are stored in crossbar orientation throughout: one row per
// logical input (inputs, then recurrent inputs, then the bias), one column
// per output. The LSTM's stacked matrix has 4*hidden columns in gate order
// (a, i, f, o), mirroring how the array computes all four gate blocks in a
// single read.
struct LstmSpec {
    int input_dim = 1;
    int hidden_dim = 1;
    bool has_bias = true;

    int stacked_rows() const { return input_dim + hidden_dim + (has_bias ? 1 : 0); }
    int stacked_cols() const { return 4 * hidden_dim; }
    // column offsets of the four gate blocks
    int a_col() const { return 0; }
    int i_col() const { return hidden_dim; }
    int f_col() const { return 2 * hidden_dim; }
    int o_col() const { return 3 * hidden_dim; }
};

enum class FcActivation { Sigmoid, Softmax };

struct FcSpec {
    int input_dim = 1;
    int output_dim = 1;
    bool has_bias = true;
    FcActivation activation = FcActivation::Sigmoid;

    int stacked_rows() const { return input_dim + (has_bias ? 1 : 0); }
};

struct LstmState {
    Vector h;      // layer output
    Vector c_hat;  // pre-tanh cell state, the quantity that recurs

    static LstmState zero(int hidden_dim) {
        return LstmState{Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)};
    }
};

// Everything backprop needs, per time step.
struct LstmStepCache {
    Vector x;
    Vector h_prev;
    Vector a, i, f, o;   // post-activation gate values
    Vector c_hat_prev;
    Vector c_hat;
    Vector c;            // tanh(c_hat)
    Vector h;
    Vector y_hat;        // FC pre-activation
    Vector y;            // FC output
};

using SequenceCache = std::vector<LstmStepCache>;

// Placement of a layer's differential pairs on the crossbar. Logical row k
// owns physical rows (2k, 2k+1) = (plus, minus) within the partition;
// construction enforces the exact footprint, so a bad partition fails fast.
struct LayerMapping {
    enum class Kind { Lstm, Fc };

    Kind kind = Kind::Fc;
    Partition partition;
    int input_dim = 0;
    int recurrent_dim = 0;  // 0 for FC layers
    int out_cols = 0;
    bool has_bias = false;

    int logical_rows() const { return input_dim + recurrent_dim + (has_bias ? 1 : 0); }
    int plus_row(int k) const { return 2 * k; }       // partition-relative
    int minus_row(int k) const { return 2 * k + 1; }

    static LayerMapping lstm(const Partition& p, const LstmSpec& spec);
    static LayerMapping fc(const Partition& p, const FcSpec& spec);
};

// Interleaves (plus, minus) target matrices into the physical 2L x C layout.
Matrix interleave_differential(const Matrix& plus, const Matrix& minus);

// Current logical weight matrix held by a mapped partition.
Matrix decode_mapped_weights(const Crossbar& xbar, const LayerMapping& map,
                             const WeightCodec& codec);

// Writes a logical weight matrix into the mapped partition. Write-and-verify
// when verify_tolerance > 0, otherwise a single two-pulse pass.
ProgramReport program_mapped_weights(Crossbar& xbar, const LayerMapping& map,
                                     const WeightCodec& codec, const Matrix& weights,
                                     double verify_tolerance = 0.0, int verify_iters = 10);

// Linear engine: forward(in) = sum_k M(k,j) in_k over the stacked parameter
// matrix, backward(delta) = sum_j M(k,j) delta_j. The input vector includes
// the trailing bias 1 when the layer has one.
class MatVec {
public:
    virtual ~MatVec() = default;
    virtual int input_rows() const = 0;
    virtual int output_cols() const = 0;
    virtual Vector forward(const Vector& in) const = 0;
    virtual Vector backward(const Vector& out_delta) const = 0;
};

class DenseMatVec : public MatVec {
public:
    explicit DenseMatVec(const Matrix* m) : m_(m) {}
    int input_rows() const override { return m_->rows(); }
    int output_cols() const override { return m_->cols(); }
    Vector forward(const Vector& in) const override;
    Vector backward(const Vector& out_delta) const override;

private:
    const Matrix* m_;
};

// Analog engine over a mapped partition. Inputs are rescaled into the
// +-v_full_scale window before the read and the decoded currents are scaled
// back, which is exact under the linear read model. Reads draw from the
// engine's own noise stream when one is set, so per-sample engines can run
// concurrently against an immutable crossbar.
class CrossbarMatVec : public MatVec {
public:
    CrossbarMatVec(const Crossbar* xbar, LayerMapping map, WeightCodec wc, VoltageCodec vc)
        : xbar_(xbar), map_(std::move(map)), wc_(wc), vc_(vc) {}

    void set_noise_stream(NoiseStream stream) {
        stream_ = stream;
        use_stream_ = true;
    }

    int input_rows() const override { return map_.logical_rows(); }
    int output_cols() const override { return map_.out_cols; }
    Vector forward(const Vector& in) const override;
    Vector backward(const Vector& out_delta) const override;

private:
    const Crossbar* xbar_;
    LayerMapping map_;
    WeightCodec wc_;
    VoltageCodec vc_;
    mutable NoiseStream stream_;
    bool use_stream_ = false;
};

// --- forward pass -----------------------------------------------------------

// One LSTM step: gates from a single stacked read, then
//   c_hat_t = i*a + f*c_hat_{t-1},  c_t = tanh(c_hat_t),  h_t = o * c_t.
LstmStepCache lstm_step(const LstmSpec& spec, const MatVec& engine, LstmState& state,
                        const Vector& x);

// Same step computed gate by gate from the stacked matrix's blocks; kept as
// the algebraically independent route for equivalence tests.
LstmStepCache lstm_step_per_gate(const LstmSpec& spec, const Matrix& stacked, LstmState& state,
                                 const Vector& x);

void fc_forward(const FcSpec& spec, const MatVec& engine, const Vector& h, Vector& y_hat,
                Vector& y);

struct ForwardResult {
    std::vector<Vector> outputs;  // y per step
    SequenceCache cache;
};

ForwardResult sequence_forward(const LstmSpec& lstm, const FcSpec& fc, const MatVec& lstm_engine,
                               const MatVec& fc_engine, const std::vector<Vector>& inputs);

// Argmax of the final step's output; ties break to the lowest index.
int classify_final_step(const std::vector<Vector>& outputs);

double sigmoid(double x);
Vector softmax(const Vector& z);

}  // namespace xbar
