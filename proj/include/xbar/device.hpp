#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xbar/matrix.hpp"
#include "xbar/rng.hpp"

namespace xbar {

// Physical operating points of the 1T1R array. The programming transfer
// function is affine in the set-pulse gate voltage: G(v_g) = (v_g - v_gate0)
// / dvgate_per_dg, clamped to the gate window. g_max defaults to the
// conductance reached at v_gate_max.
struct DeviceParams {
    double v_set = 2.5;
    double v_reset = 1.7;
    double v_read = 0.2;
    double v_gate0 = 1.0;
    double v_gate_max = 1.6;
    double v_gate_min = 0.7;
    double v_gate_reset = 5.0;
    double dvgate_per_dg = 1.02e4;  // volts per siemens
    double g_max_override = 0.0;    // <= 0: derive from the gate window
    double wire_resistance = 0.3;   // ohms between cells; recorded, not simulated

    double g_max() const {
        return g_max_override > 0.0 ? g_max_override : (v_gate_max - v_gate0) / dvgate_per_dg;
    }
    void validate() const;  // throws std::invalid_argument
};

struct NoiseModel {
    double read_noise_rel = 0.0;      // std dev as a fraction of each conductance, per read
    double program_noise_abs = 0.0;   // siemens std dev per programming pulse
    int quantization_levels = 0;      // 0 = off; >= 2 snaps programmed values to levels

    void validate() const;
};

// Rectangular sub-array of the crossbar. Zero-sized partitions are legal
// no-ops everywhere.
struct Partition {
    int row_start = 0;
    int row_count = 0;
    int col_start = 0;
    int col_count = 0;

    bool overlaps(const Partition& other) const;
};

struct MemristorCell {
    double conductance = 0.0;  // siemens
    bool gate_on = true;       // selector state during reads (all on in this model)
};

// Outcome of a programming operation over a partition, cell-for-cell.
struct ProgramReport {
    int rows = 0;
    int cols = 0;
    Matrix achieved;                  // conductance after the operation
    std::vector<std::uint8_t> clamped;    // target was outside the representable range
    std::vector<std::uint8_t> converged;  // write-verify only; two-pulse marks all converged
    std::vector<int> iterations;

    bool cell_clamped(int r, int c) const { return clamped[static_cast<std::size_t>(r) * cols + c] != 0; }
    bool cell_converged(int r, int c) const { return converged[static_cast<std::size_t>(r) * cols + c] != 0; }
    int clamp_count() const;
    int unconverged_count() const;
    bool all_converged() const { return unconverged_count() == 0; }
};

// 1T1R crossbar in the ideal-wire model: a read computes I_j = sum_i G_ij V_i
// exactly (plus optional per-read conductance noise); programming follows the
// two-pulse scheme (full reset, then a set pulse whose gate voltage encodes
// the target conductance).
//
// Reads never change state. Concurrent reads are allowed against a crossbar
// that no thread is programming, provided each reader passes its own
// NoiseStream; programming requires exclusive access.
class Crossbar {
public:
    Crossbar(int rows, int cols, DeviceParams device, NoiseModel noise, std::uint64_t seed);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::uint64_t seed() const { return seed_; }
    const DeviceParams& device() const { return device_; }
    const NoiseModel& noise() const { return noise_; }
    Partition full() const { return Partition{0, rows_, 0, cols_}; }

    MemristorCell cell(int r, int c) const { return MemristorCell{g_(r, c), true}; }

    // One set pulse at v_gate0 on every cell (plus program noise).
    void init_array();

    // Voltages on partition rows, currents out of partition columns.
    Vector read_mvm(const Partition& p, const Vector& row_voltages) const;
    Vector read_mvm(const Partition& p, const Vector& row_voltages, NoiseStream& rs) const;

    // Voltages on partition columns, currents out of partition rows.
    Vector read_mvm_transposed(const Partition& p, const Vector& col_voltages) const;
    Vector read_mvm_transposed(const Partition& p, const Vector& col_voltages, NoiseStream& rs) const;

    ProgramReport program_two_pulse(const Partition& p, const Matrix& targets,
                                    const std::vector<std::uint8_t>& mask);
    ProgramReport program_two_pulse(const Partition& p, const Matrix& targets);
    ProgramReport program_write_verify(const Partition& p, const Matrix& targets,
                                       double tolerance, int max_iters);

    // Noiseless diagnostic read of the partition's conductance matrix.
    Matrix read_conductances(const Partition& p) const;

    // Bit-exact state restore (snapshot loading); values must lie in [0, g_max].
    void restore_conductances(const Partition& p, const Matrix& values);

private:
    void check_partition(const Partition& p) const;
    // Deterministic part of a set pulse targeting conductance `target`.
    double set_pulse_level(double target, bool* clamped) const;
    double apply_program_noise(double g, double draw) const;

    int rows_;
    int cols_;
    DeviceParams device_;
    NoiseModel noise_;
    std::uint64_t seed_;
    Matrix g_;
    NoiseStream program_stream_;
    mutable NoiseStream default_read_stream_;
};

// --- conductance/weight map file format ------------------------------------
//
//   rows <r>
//   cols <c>
//   units <string>
//   seed <u64>
//   <c values per line, scientific notation, bit-exact round trip>

struct ValueMap {
    int rows = 0;
    int cols = 0;
    std::string units = "S";
    std::uint64_t seed = 0;
    Matrix values;
};

void write_value_map(std::ostream& out, const ValueMap& map);
ValueMap read_value_map(std::istream& in);
void save_value_map(const std::string& path, const ValueMap& map);
ValueMap load_value_map(const std::string& path);

}  // namespace xbar
