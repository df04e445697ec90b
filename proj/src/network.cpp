#include "xbar/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xbar/kernels.hpp"

namespace xbar {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector softmax(const Vector& z) {
    double m = z.empty() ? 0.0 : z[0];
    for (double v : z) m = std::max(m, v);
    Vector out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

LayerMapping LayerMapping::lstm(const Partition& p, const LstmSpec& spec) {
    LayerMapping m;
    m.kind = Kind::Lstm;
    m.partition = p;
    m.input_dim = spec.input_dim;
    m.recurrent_dim = spec.hidden_dim;
    m.out_cols = spec.stacked_cols();
    m.has_bias = spec.has_bias;
    if (p.row_count != 2 * m.logical_rows())
        throw std::invalid_argument("mapping: LSTM partition rows must equal 2*(inputs+recurrent+bias)");
    if (p.col_count != m.out_cols)
        throw std::invalid_argument("mapping: LSTM partition cols must equal 4*hidden");
    return m;
}

LayerMapping LayerMapping::fc(const Partition& p, const FcSpec& spec) {
    LayerMapping m;
    m.kind = Kind::Fc;
    m.partition = p;
    m.input_dim = spec.input_dim;
    m.recurrent_dim = 0;
    m.out_cols = spec.output_dim;
    m.has_bias = spec.has_bias;
    if (p.row_count != 2 * m.logical_rows())
        throw std::invalid_argument("mapping: FC partition rows must equal 2*(inputs+bias)");
    if (p.col_count != m.out_cols)
        throw std::invalid_argument("mapping: FC partition cols must equal outputs");
    return m;
}

Matrix interleave_differential(const Matrix& plus, const Matrix& minus) {
    plus.require_same_shape(minus);
    Matrix out(2 * plus.rows(), plus.cols());
    for (int r = 0; r < plus.rows(); ++r) {
        for (int c = 0; c < plus.cols(); ++c) {
            out(2 * r, c) = plus(r, c);
            out(2 * r + 1, c) = minus(r, c);
        }
    }
    return out;
}

Matrix decode_mapped_weights(const Crossbar& xbar, const LayerMapping& map,
                             const WeightCodec& codec) {
    const Matrix g = xbar.read_conductances(map.partition);
    const int rows = map.logical_rows();
    Matrix plus(rows, map.out_cols), minus(rows, map.out_cols);
    for (int k = 0; k < rows; ++k) {
        for (int c = 0; c < map.out_cols; ++c) {
            plus(k, c) = g(map.plus_row(k), c);
            minus(k, c) = g(map.minus_row(k), c);
        }
    }
    return decode_weights(plus, minus, codec);
}

ProgramReport program_mapped_weights(Crossbar& xbar, const LayerMapping& map,
                                     const WeightCodec& codec, const Matrix& weights,
                                     double verify_tolerance, int verify_iters) {
    if (weights.rows() != map.logical_rows() || weights.cols() != map.out_cols)
        throw std::invalid_argument("mapping: weight shape does not match layer mapping");
    const EncodedWeights enc = encode_weights(weights, codec);
    const Matrix targets = interleave_differential(enc.plus, enc.minus);
    if (verify_tolerance > 0.0)
        return xbar.program_write_verify(map.partition, targets, verify_tolerance, verify_iters);
    return xbar.program_two_pulse(map.partition, targets);
}

Vector DenseMatVec::forward(const Vector& in) const { return multiply_transpose(*m_, in); }

Vector DenseMatVec::backward(const Vector& out_delta) const { return multiply(*m_, out_delta); }

namespace {

// Rescale into [-1, 1] so the voltage encoding never exceeds the read window;
// exact to round back out under the linear read model.
double input_scale(const Vector& v) { return std::max(1.0, max_abs(v)); }

}  // namespace

Vector CrossbarMatVec::forward(const Vector& in) const {
    if (static_cast<int>(in.size()) != map_.logical_rows())
        throw std::invalid_argument("analog forward: input length does not match mapping");
    const double scale = input_scale(in);
    Vector scaled(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) scaled[k] = in[k] / scale;
    const VoltagePair vp = values_to_voltages(scaled, vc_, /*signed_values=*/true);
    Vector volts(static_cast<std::size_t>(map_.partition.row_count));
    for (int k = 0; k < map_.logical_rows(); ++k) {
        volts[map_.plus_row(k)] = vp.plus[k];
        volts[map_.minus_row(k)] = vp.minus[k];
    }
    Vector currents = use_stream_ ? xbar_->read_mvm(map_.partition, volts, stream_)
                                  : xbar_->read_mvm(map_.partition, volts);
    Vector out = currents_to_values(currents, wc_, vc_);
    for (double& v : out) v *= scale;
    return out;
}

Vector CrossbarMatVec::backward(const Vector& out_delta) const {
    if (static_cast<int>(out_delta.size()) != map_.out_cols)
        throw std::invalid_argument("analog backward: delta length does not match mapping");
    const double scale = input_scale(out_delta);
    Vector scaled(out_delta.size());
    for (std::size_t j = 0; j < out_delta.size(); ++j) scaled[j] = out_delta[j] / scale;
    const VoltagePair vp = values_to_voltages(scaled, vc_, /*signed_values=*/true);
    Vector currents = use_stream_
                          ? xbar_->read_mvm_transposed(map_.partition, vp.plus, stream_)
                          : xbar_->read_mvm_transposed(map_.partition, vp.plus);
    // Differential pairs on the transposed read: the plus and minus rows of
    // logical input k carry G+ * v and G- * v; their difference is the
    // decoded component.
    Vector out(static_cast<std::size_t>(map_.logical_rows()));
    const double decode = wc_.g_per_w * vc_.v_full_scale;
    for (int k = 0; k < map_.logical_rows(); ++k)
        out[k] = (currents[map_.plus_row(k)] - currents[map_.minus_row(k)]) / decode * scale;
    return out;
}

namespace {

void finish_lstm_step(const LstmSpec& spec, const Vector& gates, LstmState& state, const Vector& x,
                      LstmStepCache& cache) {
    const int H = spec.hidden_dim;
    cache.x = x;
    cache.h_prev = state.h;
    cache.c_hat_prev = state.c_hat;
    cache.a.resize(H);
    cache.i.resize(H);
    cache.f.resize(H);
    cache.o.resize(H);
    cache.c_hat.resize(H);
    cache.c.resize(H);
    cache.h.resize(H);
    for (int u = 0; u < H; ++u) {
        cache.a[u] = std::tanh(gates[spec.a_col() + u]);
        cache.i[u] = sigmoid(gates[spec.i_col() + u]);
        cache.f[u] = sigmoid(gates[spec.f_col() + u]);
        cache.o[u] = sigmoid(gates[spec.o_col() + u]);
        cache.c_hat[u] = cache.i[u] * cache.a[u] + cache.f[u] * cache.c_hat_prev[u];
        cache.c[u] = std::tanh(cache.c_hat[u]);
        cache.h[u] = cache.o[u] * cache.c[u];
    }
    state.h = cache.h;
    state.c_hat = cache.c_hat;
}

Vector stacked_input(const Vector& x, const Vector& h_prev, bool has_bias) {
    Vector in;
    in.reserve(x.size() + h_prev.size() + (has_bias ? 1 : 0));
    in.insert(in.end(), x.begin(), x.end());
    in.insert(in.end(), h_prev.begin(), h_prev.end());
    if (has_bias) in.push_back(1.0);
    return in;
}

}  // namespace

LstmStepCache lstm_step(const LstmSpec& spec, const MatVec& engine, LstmState& state,
                        const Vector& x) {
    if (static_cast<int>(x.size()) != spec.input_dim)
        throw std::invalid_argument("lstm_step: input dimension mismatch");
    if (static_cast<int>(state.h.size()) != spec.hidden_dim ||
        static_cast<int>(state.c_hat.size()) != spec.hidden_dim)
        throw std::invalid_argument("lstm_step: state dimension mismatch");
    if (!all_finite(x)) throw std::invalid_argument("lstm_step: non-finite input");
    if (engine.input_rows() != spec.stacked_rows() || engine.output_cols() != spec.stacked_cols())
        throw std::invalid_argument("lstm_step: engine shape does not match spec");

    const Vector in = stacked_input(x, state.h, spec.has_bias);
    const Vector gates = engine.forward(in);
    LstmStepCache cache;
    finish_lstm_step(spec, gates, state, x, cache);
    return cache;
}

LstmStepCache lstm_step_per_gate(const LstmSpec& spec, const Matrix& stacked, LstmState& state,
                                 const Vector& x) {
    if (stacked.rows() != spec.stacked_rows() || stacked.cols() != spec.stacked_cols())
        throw std::invalid_argument("lstm_step_per_gate: stacked shape mismatch");
    const int X = spec.input_dim, H = spec.hidden_dim;
    Vector gates(static_cast<std::size_t>(spec.stacked_cols()), 0.0);
    // W block (input rows), U block (recurrent rows), then the bias row,
    // evaluated separately per gate.
    for (int gate = 0; gate < 4; ++gate) {
        for (int u = 0; u < H; ++u) {
            const int col = gate * H + u;
            double acc = 0.0;
            for (int k = 0; k < X; ++k) acc += stacked(k, col) * x[k];
            for (int k = 0; k < H; ++k) acc += stacked(X + k, col) * state.h[k];
            if (spec.has_bias) acc += stacked(X + H, col);
            gates[col] = acc;
        }
    }
    LstmStepCache cache;
    finish_lstm_step(spec, gates, state, x, cache);
    return cache;
}

void fc_forward(const FcSpec& spec, const MatVec& engine, const Vector& h, Vector& y_hat,
                Vector& y) {
    if (static_cast<int>(h.size()) != spec.input_dim)
        throw std::invalid_argument("fc_forward: input dimension mismatch");
    if (engine.input_rows() != spec.stacked_rows() || engine.output_cols() != spec.output_dim)
        throw std::invalid_argument("fc_forward: engine shape does not match spec");
    Vector in = h;
    if (spec.has_bias) in.push_back(1.0);
    y_hat = engine.forward(in);
    if (spec.activation == FcActivation::Softmax) {
        y = softmax(y_hat);
    } else {
        y.resize(y_hat.size());
        for (std::size_t i = 0; i < y_hat.size(); ++i) y[i] = sigmoid(y_hat[i]);
    }
}

ForwardResult sequence_forward(const LstmSpec& lstm, const FcSpec& fc, const MatVec& lstm_engine,
                               const MatVec& fc_engine, const std::vector<Vector>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("sequence_forward: empty sequence");
    ForwardResult result;
    result.cache.reserve(inputs.size());
    result.outputs.reserve(inputs.size());
    LstmState state = LstmState::zero(lstm.hidden_dim);
    for (const Vector& x : inputs) {
        LstmStepCache step = lstm_step(lstm, lstm_engine, state, x);
        fc_forward(fc, fc_engine, step.h, step.y_hat, step.y);
        result.outputs.push_back(step.y);
        result.cache.push_back(std::move(step));
    }
    return result;
}

int classify_final_step(const std::vector<Vector>& outputs) {
    if (outputs.empty()) throw std::invalid_argument("classify: empty output sequence");
    const Vector& y = outputs.back();
    int best = 0;
    for (int i = 1; i < static_cast<int>(y.size()); ++i)
        if (y[i] > y[best]) best = i;
    return best;
}

}  // namespace xbar
