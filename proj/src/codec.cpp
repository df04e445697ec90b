#include "xbar/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace xbar {

EncodedWeights encode_weights(const Matrix& weights, const WeightCodec& codec) {
    if (!(codec.g_per_w > 0.0)) throw std::invalid_argument("codec: g_per_w must be positive");
    EncodedWeights out;
    out.plus = Matrix(weights.rows(), weights.cols(), 0.0);
    out.minus = Matrix(weights.rows(), weights.cols(), 0.0);
    out.clamped.assign(weights.size(), 0);
    for (int r = 0; r < weights.rows(); ++r) {
        for (int c = 0; c < weights.cols(); ++c) {
            double g = weights(r, c) * codec.g_per_w;
            bool clip = false;
            if (g > codec.g_max) {
                g = codec.g_max;
                clip = true;
            } else if (g < -codec.g_max) {
                g = -codec.g_max;
                clip = true;
            }
            if (g >= 0.0)
                out.plus(r, c) = g;
            else
                out.minus(r, c) = -g;
            if (clip) {
                out.clamped[static_cast<std::size_t>(r) * weights.cols() + c] = 1;
                ++out.clamp_count;
            }
        }
    }
    return out;
}

Matrix decode_weights(const Matrix& g_plus, const Matrix& g_minus, const WeightCodec& codec) {
    g_plus.require_same_shape(g_minus);
    if (!(codec.g_per_w > 0.0)) throw std::invalid_argument("codec: g_per_w must be positive");
    Matrix w(g_plus.rows(), g_plus.cols());
    for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c)
            w(r, c) = (g_plus(r, c) - g_minus(r, c)) / codec.g_per_w;
    return w;
}

VoltagePair values_to_voltages(const Vector& values, const VoltageCodec& codec,
                               bool signed_values) {
    VoltagePair out;
    out.plus.resize(values.size());
    out.minus.resize(values.size());
    const double slack = 1e-9;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double n;
        if (signed_values) {
            n = values[i];
            if (!(std::fabs(n) <= 1.0 + slack))
                throw std::domain_error("codec: signed value outside [-1, 1]");
        } else {
            const double span = codec.value_max - codec.value_min;
            if (values[i] < codec.value_min - slack || values[i] > codec.value_max + slack)
                throw std::domain_error("codec: value outside normalization bounds");
            n = span > 0.0 ? (values[i] - codec.value_min) / span : 0.5;
        }
        const double v = codec.v_full_scale * n;
        out.plus[i] = v;
        out.minus[i] = -v;
    }
    return out;
}

Vector currents_to_values(const Vector& currents, const WeightCodec& wc, const VoltageCodec& vc) {
    const double scale = wc.g_per_w * vc.v_full_scale;
    if (!(scale > 0.0)) throw std::invalid_argument("codec: nonpositive decode scale");
    Vector out(currents.size());
    for (std::size_t i = 0; i < currents.size(); ++i) out[i] = currents[i] / scale;
    return out;
}

}  // namespace xbar
