#pragma once

#include <cstdint>
#include <vector>

#include "xbar/matrix.hpp"

namespace xbar {

// Weight <-> conductance mapping. Each weight is the conductance difference
// of a plus/minus device pair in the same column, one-sided: the inactive
// side stays at 0 S so the full conductance window carries magnitude.
struct WeightCodec {
    double g_per_w = 1e-4;          // siemens per unit weight
    double g_max = 5.0e-5;          // representable conductance bound (from the device)
    double bias_row_voltage = 0.2;  // fixed drive on bias rows

    double max_weight() const { return g_max / g_per_w; }
};

struct EncodedWeights {
    Matrix plus;
    Matrix minus;
    std::vector<std::uint8_t> clamped;  // per logical weight
    int clamp_count = 0;
};

EncodedWeights encode_weights(const Matrix& weights, const WeightCodec& codec);
Matrix decode_weights(const Matrix& g_plus, const Matrix& g_minus, const WeightCodec& codec);

// Value <-> row-voltage mapping. Values are normalized to the codec bounds
// and scaled to the full-scale read voltage; the plus row is driven with +v
// and the minus row with -v so the column current realizes (G+ - G-) * v.
struct VoltageCodec {
    double v_full_scale = 0.2;  // must not exceed the device read voltage
    double value_min = -1.0;
    double value_max = 1.0;
};

struct VoltagePair {
    Vector plus;
    Vector minus;
};

// signed_values=true: values must already lie in [-1, 1] and map to
// v = v_full_scale * x. signed_values=false: values in [value_min, value_max]
// map through (x - min) / (max - min) to [0, v_full_scale]; a degenerate
// range maps to the midpoint.
VoltagePair values_to_voltages(const Vector& values, const VoltageCodec& codec, bool signed_values);

// Inverse of the composed encode/read chain: current / (g_per_w * v_full_scale)
// returns column outputs in weight units.
Vector currents_to_values(const Vector& currents, const WeightCodec& wc, const VoltageCodec& vc);

}  // namespace xbar
