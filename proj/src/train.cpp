#include "xbar/train.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "xbar/device.hpp"
#include "xbar/kernels.hpp"
#include "xbar/textio.hpp"

namespace xbar {

GradientSet GradientSet::zero(const LstmSpec& lstm_spec, const FcSpec& fc_spec) {
    GradientSet g;
    g.lstm = Matrix(lstm_spec.stacked_rows(), lstm_spec.stacked_cols(), 0.0);
    g.fc = Matrix(fc_spec.stacked_rows(), fc_spec.output_dim, 0.0);
    return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
    lstm += other.lstm;
    fc += other.fc;
    return *this;
}

double loss_mse_sequence(const std::vector<Vector>& outputs,
                         const std::vector<Vector>& targets) {
    if (outputs.size() != targets.size())
        throw std::invalid_argument("mse: output/target length mismatch");
    const double T = static_cast<double>(outputs.size());
    double loss = 0.0;
    for (std::size_t t = 0; t < outputs.size(); ++t) {
        if (outputs[t].size() != targets[t].size())
            throw std::invalid_argument("mse: output/target width mismatch");
        double sq = 0.0;
        for (std::size_t k = 0; k < outputs[t].size(); ++k) {
            const double d = outputs[t][k] - targets[t][k];
            sq += d * d;
        }
        loss += 0.5 * sq / T;
    }
    return loss;
}

double loss_crossentropy_final(const Vector& y_final, const Vector& target_onehot) {
    if (y_final.size() != target_onehot.size())
        throw std::invalid_argument("crossentropy: length mismatch");
    double sum = 0.0;
    for (double v : y_final) {
        if (!(v >= 0.0)) throw std::invalid_argument("crossentropy: negative output");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("crossentropy: output does not sum to 1");
    double loss = 0.0;
    for (std::size_t c = 0; c < y_final.size(); ++c) {
        if (target_onehot[c] == 0.0) continue;
        if (!(y_final[c] > 0.0))
            throw std::invalid_argument("crossentropy: zero probability on the target class");
        loss -= target_onehot[c] * std::log(y_final[c]);
    }
    return loss;
}

Vector output_delta(Task task, const Vector& y, const Vector& target, int t, int T) {
    if (y.size() != target.size()) throw std::invalid_argument("output_delta: length mismatch");
    Vector d(y.size(), 0.0);
    if (task == Task::Regression) {
        // exact gradient of the summed per-step loss; the reported loss
        // additionally averages over T
        for (std::size_t k = 0; k < y.size(); ++k)
            d[k] = (y[k] - target[k]) * y[k] * (1.0 - y[k]);
    } else if (t == T) {
        for (std::size_t k = 0; k < y.size(); ++k) d[k] = y[k] - target[k];
    }
    return d;
}

GradientSet bptt(const LstmSpec& lstm_spec, const FcSpec& fc_spec, const MatVec& lstm_engine,
                 const MatVec& fc_engine, const SequenceCache& cache,
                 const std::vector<Vector>& output_deltas, std::vector<DeltaWorkspace>* trace) {
    const int T = static_cast<int>(cache.size());
    if (T == 0) throw std::invalid_argument("bptt: empty cache");
    if (output_deltas.size() != cache.size())
        throw std::invalid_argument("bptt: one output delta per step required");
    const int H = lstm_spec.hidden_dim;
    const int X = lstm_spec.input_dim;

    GradientSet grads = GradientSet::zero(lstm_spec, fc_spec);
    if (trace) trace->assign(cache.size(), DeltaWorkspace{});

    Vector dh_next(H, 0.0);      // recurrent delta flowing from step t+1
    Vector dc_hat_next(H, 0.0);  // cell-state delta flowing from step t+1

    for (int t = T - 1; t >= 0; --t) {
        const LstmStepCache& step = cache[t];
        if (static_cast<int>(step.h.size()) != H || static_cast<int>(step.x.size()) != X)
            throw std::invalid_argument("bptt: cache entry shape mismatch");
        const Vector& dy_hat = output_deltas[t];

        // FC gradients and the hidden delta through the FC weights.
        Vector fc_in = step.h;
        if (fc_spec.has_bias) fc_in.push_back(1.0);
        add_outer(grads.fc, fc_in, dy_hat);
        const Vector back = fc_engine.backward(dy_hat);  // (inputs[+bias])
        Vector dh(H);
        for (int u = 0; u < H; ++u) dh[u] = back[u] + dh_next[u];

        // Gate deltas; derivatives evaluated on post-activation values.
        Vector dgates(static_cast<std::size_t>(lstm_spec.stacked_cols()), 0.0);
        Vector dc_hat(H);
        for (int u = 0; u < H; ++u) {
            const double o = step.o[u], c = step.c[u], a = step.a[u], i = step.i[u],
                         f = step.f[u];
            const double d_o_hat = dh[u] * c * o * (1.0 - o);
            dc_hat[u] = dh[u] * o * (1.0 - c * c) + dc_hat_next[u];
            const double d_a_hat = dc_hat[u] * i * (1.0 - a * a);
            const double d_i_hat = dc_hat[u] * a * i * (1.0 - i);
            const double d_f_hat = dc_hat[u] * step.c_hat_prev[u] * f * (1.0 - f);
            dgates[lstm_spec.a_col() + u] = d_a_hat;
            dgates[lstm_spec.i_col() + u] = d_i_hat;
            dgates[lstm_spec.f_col() + u] = d_f_hat;
            dgates[lstm_spec.o_col() + u] = d_o_hat;
        }

        // Stacked-parameter gradients (all four gate blocks in one outer
        // product) and the input-side deltas through the transposed stack.
        const Vector in = [&] {
            Vector v;
            v.reserve(static_cast<std::size_t>(lstm_spec.stacked_rows()));
            v.insert(v.end(), step.x.begin(), step.x.end());
            v.insert(v.end(), step.h_prev.begin(), step.h_prev.end());
            if (lstm_spec.has_bias) v.push_back(1.0);
            return v;
        }();
        add_outer(grads.lstm, in, dgates);
        const Vector din = lstm_engine.backward(dgates);  // (x, h_prev[, bias])

        if (trace) {
            DeltaWorkspace& w = (*trace)[t];
            w.dy_hat = dy_hat;
            w.dh = dh;
            w.dc_hat = dc_hat;
            w.do_hat.resize(H);
            w.da_hat.resize(H);
            w.di_hat.resize(H);
            w.df_hat.resize(H);
            for (int u = 0; u < H; ++u) {
                w.da_hat[u] = dgates[lstm_spec.a_col() + u];
                w.di_hat[u] = dgates[lstm_spec.i_col() + u];
                w.df_hat[u] = dgates[lstm_spec.f_col() + u];
                w.do_hat[u] = dgates[lstm_spec.o_col() + u];
            }
            w.dx.assign(din.begin(), din.begin() + X);
            w.dh_prev.assign(din.begin() + X, din.begin() + X + H);
        }

        for (int u = 0; u < H; ++u) {
            dh_next[u] = din[X + u];
            dc_hat_next[u] = dc_hat[u] * step.f[u];
        }
    }
    return grads;
}

OptimizerState OptimizerState::zero(const LstmSpec& lstm_spec, const FcSpec& fc_spec) {
    OptimizerState s;
    s.velocity_lstm = Matrix(lstm_spec.stacked_rows(), lstm_spec.stacked_cols(), 0.0);
    s.velocity_fc = Matrix(fc_spec.stacked_rows(), fc_spec.output_dim, 0.0);
    s.ms_lstm = Matrix(lstm_spec.stacked_rows(), lstm_spec.stacked_cols(), 0.0);
    s.ms_fc = Matrix(fc_spec.stacked_rows(), fc_spec.output_dim, 0.0);
    return s;
}

void sgdm_update(Matrix& velocity, const Matrix& grad, const OptimizerParams& p, Matrix& update) {
    velocity.require_same_shape(grad);
    update = Matrix(grad.rows(), grad.cols());
    for (int r = 0; r < grad.rows(); ++r) {
        for (int c = 0; c < grad.cols(); ++c) {
            velocity(r, c) = p.eta * velocity(r, c) + p.alpha * grad(r, c);
            update(r, c) = -velocity(r, c);
        }
    }
}

void rmsprop_update(Matrix& ms, Matrix& velocity, const Matrix& grad, const OptimizerParams& p,
                    Matrix& update) {
    ms.require_same_shape(grad);
    velocity.require_same_shape(grad);
    update = Matrix(grad.rows(), grad.cols());
    for (int r = 0; r < grad.rows(); ++r) {
        for (int c = 0; c < grad.cols(); ++c) {
            const double g = grad(r, c);
            ms(r, c) = p.beta * ms(r, c) + (1.0 - p.beta) * g * g;
            velocity(r, c) = p.eta * velocity(r, c) + p.alpha * g / (std::sqrt(ms(r, c)) + p.epsilon);
            update(r, c) = -velocity(r, c);
        }
    }
}

GradientSet sgdm_step(OptimizerState& state, const OptimizerParams& p, const GradientSet& grad) {
    GradientSet update;
    sgdm_update(state.velocity_lstm, grad.lstm, p, update.lstm);
    sgdm_update(state.velocity_fc, grad.fc, p, update.fc);
    return update;
}

GradientSet rmsprop_step(OptimizerState& state, const OptimizerParams& p,
                         const GradientSet& grad) {
    GradientSet update;
    rmsprop_update(state.ms_lstm, state.velocity_lstm, grad.lstm, p, update.lstm);
    rmsprop_update(state.ms_fc, state.velocity_fc, grad.fc, p, update.fc);
    return update;
}

ProgramReport insitu_update(Crossbar& xbar, const LayerMapping& map, const WeightCodec& codec,
                            const Matrix& delta_w) {
    Matrix w = decode_mapped_weights(xbar, map, codec);
    w.require_same_shape(delta_w);
    w += delta_w;
    return program_mapped_weights(xbar, map, codec, w);
}

void TrainingLog::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    // batch records in execution order, each epoch record after its batches
    std::size_t ei = 0;
    for (std::size_t bi = 0; bi <= batches.size(); ++bi) {
        while (ei < epochs.size() &&
               (bi == batches.size() || epochs[ei].epoch < batches[bi].epoch)) {
            out << "epoch " << epochs[ei].epoch << ' ' << format_double(epochs[ei].test_metric)
                << '\n';
            ++ei;
        }
        if (bi < batches.size())
            out << "batch " << batches[bi].epoch << ' ' << batches[bi].batch << ' '
                << format_double(batches[bi].loss) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TrainingLog TrainingLog::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    TrainingLog log;
    std::string kind;
    while (in >> kind) {
        if (kind == "batch") {
            BatchRecord r;
            std::string loss;
            if (!(in >> r.epoch >> r.batch >> loss))
                throw std::runtime_error("training log: malformed batch record");
            r.loss = std::strtod(loss.c_str(), nullptr);
            log.batches.push_back(r);
        } else if (kind == "epoch") {
            EpochRecord r;
            std::string metric;
            if (!(in >> r.epoch >> metric))
                throw std::runtime_error("training log: malformed epoch record");
            r.test_metric = std::strtod(metric.c_str(), nullptr);
            log.epochs.push_back(r);
        } else {
            throw std::runtime_error("training log: unknown record kind '" + kind + "'");
        }
    }
    return log;
}

}  // namespace xbar
