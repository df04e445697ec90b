#include "xbar/device.hpp"

#include "xbar/textio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace xbar {

void DeviceParams::validate() const {
    if (!(v_gate_min < v_gate0 && v_gate0 <= v_gate_max))
        throw std::invalid_argument("device: require v_gate_min < v_gate0 <= v_gate_max");
    if (!(v_read < v_reset && v_reset < v_set))
        throw std::invalid_argument("device: require v_read < v_reset < v_set");
    if (!(dvgate_per_dg > 0.0))
        throw std::invalid_argument("device: dvgate_per_dg must be positive");
    if (!(g_max() > 0.0))
        throw std::invalid_argument("device: g_max must be positive");
}

void NoiseModel::validate() const {
    if (read_noise_rel < 0.0 || program_noise_abs < 0.0)
        throw std::invalid_argument("noise: magnitudes must be >= 0");
    if (quantization_levels != 0 && quantization_levels < 2)
        throw std::invalid_argument("noise: quantization_levels must be 0 or >= 2");
}

bool Partition::overlaps(const Partition& other) const {
    const bool row_disjoint =
        row_start + row_count <= other.row_start || other.row_start + other.row_count <= row_start;
    const bool col_disjoint =
        col_start + col_count <= other.col_start || other.col_start + other.col_count <= col_start;
    if (row_count == 0 || col_count == 0 || other.row_count == 0 || other.col_count == 0)
        return false;
    return !(row_disjoint || col_disjoint);
}

int ProgramReport::clamp_count() const {
    int n = 0;
    for (auto f : clamped) n += f != 0;
    return n;
}

int ProgramReport::unconverged_count() const {
    int n = 0;
    for (auto f : converged) n += f == 0;
    return n;
}

Crossbar::Crossbar(int rows, int cols, DeviceParams device, NoiseModel noise, std::uint64_t seed)
    : rows_(rows),
      cols_(cols),
      device_(device),
      noise_(noise),
      seed_(seed),
      g_(rows, cols, 0.0),
      program_stream_(seed, 0),
      default_read_stream_(seed, 1) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("crossbar: size must be positive");
    device_.validate();
    noise_.validate();
}

void Crossbar::check_partition(const Partition& p) const {
    if (p.row_count < 0 || p.col_count < 0 || p.row_start < 0 || p.col_start < 0 ||
        p.row_start + p.row_count > rows_ || p.col_start + p.col_count > cols_)
        throw std::invalid_argument("partition does not fit inside the crossbar");
}

double Crossbar::set_pulse_level(double target, bool* clamped) const {
    const double g_max = device_.g_max();
    double v_gate = device_.v_gate0 + target * device_.dvgate_per_dg;
    bool clip = false;
    if (v_gate > device_.v_gate_max) {
        v_gate = device_.v_gate_max;
        clip = true;
    } else if (v_gate < device_.v_gate_min) {
        v_gate = device_.v_gate_min;
        clip = true;
    }
    double g = (v_gate - device_.v_gate0) / device_.dvgate_per_dg;
    if (g < 0.0) {
        g = 0.0;
        clip = clip || target < 0.0;
    } else if (g > g_max) {
        g = g_max;
        clip = true;
    }
    if (clamped) *clamped = clip;
    return g;
}

double Crossbar::apply_program_noise(double g, double draw) const {
    const double g_max = device_.g_max();
    if (noise_.program_noise_abs > 0.0) g += noise_.program_noise_abs * draw;
    g = std::clamp(g, 0.0, g_max);
    if (noise_.quantization_levels >= 2) {
        const double step = g_max / (noise_.quantization_levels - 1);
        g = std::clamp(std::round(g / step) * step, 0.0, g_max);
    }
    return g;
}

void Crossbar::init_array() {
    // One set pulse everywhere with the gate at its offset voltage: the
    // deterministic level is 0 S, so only program noise shows up.
    bool clip = false;
    const double level = set_pulse_level(0.0, &clip);
    const std::uint64_t base = program_stream_.counter();
    const bool noisy = noise_.program_noise_abs > 0.0;
    const long work = static_cast<long>(rows_) * cols_;
#pragma omp parallel for schedule(static) if (work >= 4096)
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            const std::uint64_t idx = base + static_cast<std::uint64_t>(r) * cols_ + c;
            const double draw = noisy ? program_stream_.gaussian_at(idx) : 0.0;
            g_(r, c) = apply_program_noise(level, draw);
        }
    }
    program_stream_.advance(static_cast<std::uint64_t>(rows_) * cols_);
}

namespace {

void check_read_voltages(const Vector& v, int expected, double v_read) {
    if (static_cast<int>(v.size()) != expected)
        throw std::invalid_argument("read: voltage vector length does not match partition");
    const double limit = v_read * (1.0 + 1e-12);
    for (double x : v)
        if (!(std::fabs(x) <= limit))
            throw std::domain_error("read: voltage exceeds v_read (programming-disturb hazard)");
}

}  // namespace

Vector Crossbar::read_mvm(const Partition& p, const Vector& row_voltages) const {
    return read_mvm(p, row_voltages, default_read_stream_);
}

Vector Crossbar::read_mvm(const Partition& p, const Vector& row_voltages, NoiseStream& rs) const {
    check_partition(p);
    check_read_voltages(row_voltages, p.row_count, device_.v_read);
    Vector out(static_cast<std::size_t>(p.col_count), 0.0);
    const bool noisy = noise_.read_noise_rel > 0.0;
    const double rel = noise_.read_noise_rel;
    const std::uint64_t base = rs.counter();
    const long work = static_cast<long>(p.row_count) * p.col_count;
#pragma omp parallel for schedule(static) if (work >= 16384)
    for (int c = 0; c < p.col_count; ++c) {
        double acc = 0.0;
        for (int r = 0; r < p.row_count; ++r) {
            double g = g_(p.row_start + r, p.col_start + c);
            if (noisy) {
                const std::uint64_t idx = base + static_cast<std::uint64_t>(r) * p.col_count + c;
                g += rel * g * rs.gaussian_at(idx);
            }
            acc += g * row_voltages[r];
        }
        out[c] = acc;
    }
    if (noisy) rs.advance(static_cast<std::uint64_t>(p.row_count) * p.col_count);
    return out;
}

Vector Crossbar::read_mvm_transposed(const Partition& p, const Vector& col_voltages) const {
    return read_mvm_transposed(p, col_voltages, default_read_stream_);
}

Vector Crossbar::read_mvm_transposed(const Partition& p, const Vector& col_voltages,
                                     NoiseStream& rs) const {
    check_partition(p);
    check_read_voltages(col_voltages, p.col_count, device_.v_read);
    Vector out(static_cast<std::size_t>(p.row_count), 0.0);
    const bool noisy = noise_.read_noise_rel > 0.0;
    const double rel = noise_.read_noise_rel;
    const std::uint64_t base = rs.counter();
    const long work = static_cast<long>(p.row_count) * p.col_count;
#pragma omp parallel for schedule(static) if (work >= 16384)
    for (int r = 0; r < p.row_count; ++r) {
        double acc = 0.0;
        for (int c = 0; c < p.col_count; ++c) {
            double g = g_(p.row_start + r, p.col_start + c);
            if (noisy) {
                const std::uint64_t idx = base + static_cast<std::uint64_t>(r) * p.col_count + c;
                g += rel * g * rs.gaussian_at(idx);
            }
            acc += g * col_voltages[c];
        }
        out[r] = acc;
    }
    if (noisy) rs.advance(static_cast<std::uint64_t>(p.row_count) * p.col_count);
    return out;
}

ProgramReport Crossbar::program_two_pulse(const Partition& p, const Matrix& targets) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(p.row_count) * p.col_count, 1);
    return program_two_pulse(p, targets, mask);
}

ProgramReport Crossbar::program_two_pulse(const Partition& p, const Matrix& targets,
                                          const std::vector<std::uint8_t>& mask) {
    check_partition(p);
    if (targets.rows() != p.row_count || targets.cols() != p.col_count)
        throw std::invalid_argument("program: target shape does not match partition");
    if (mask.size() != static_cast<std::size_t>(p.row_count) * p.col_count)
        throw std::invalid_argument("program: mask size does not match partition");

    ProgramReport report;
    report.rows = p.row_count;
    report.cols = p.col_count;
    report.clamped.assign(mask.size(), 0);
    report.converged.assign(mask.size(), 1);
    report.iterations.assign(mask.size(), 1);

    const std::uint64_t base = program_stream_.counter();
    const bool noisy = noise_.program_noise_abs > 0.0;
    const long work = static_cast<long>(p.row_count) * p.col_count;
#pragma omp parallel for schedule(static) if (work >= 4096)
    for (int r = 0; r < p.row_count; ++r) {
        for (int c = 0; c < p.col_count; ++c) {
            const std::size_t flat = static_cast<std::size_t>(r) * p.col_count + c;
            if (!mask[flat]) {
                report.iterations[flat] = 0;
                continue;
            }
            // Reset pulse (v_reset, gate at v_gate_reset) returns the cell to
            // 0 S; the set pulse then lands on the encoded level.
            bool clip = false;
            const double level = set_pulse_level(targets(r, c), &clip);
            const double draw = noisy ? program_stream_.gaussian_at(base + flat) : 0.0;
            g_(p.row_start + r, p.col_start + c) = apply_program_noise(level, draw);
            report.clamped[flat] = clip ? 1 : 0;
        }
    }
    program_stream_.advance(static_cast<std::uint64_t>(p.row_count) * p.col_count);
    report.achieved = read_conductances(p);
    return report;
}

ProgramReport Crossbar::program_write_verify(const Partition& p, const Matrix& targets,
                                             double tolerance, int max_iters) {
    check_partition(p);
    if (!(tolerance > 0.0)) throw std::invalid_argument("write-verify: tolerance must be positive");
    if (max_iters < 1) throw std::invalid_argument("write-verify: max_iters must be >= 1");

    const std::size_t n = static_cast<std::size_t>(p.row_count) * p.col_count;
    std::vector<std::uint8_t> remaining(n, 1);
    ProgramReport report;
    report.rows = p.row_count;
    report.cols = p.col_count;
    report.clamped.assign(n, 0);
    report.converged.assign(n, 0);
    report.iterations.assign(n, 0);

    for (int iter = 1; iter <= max_iters; ++iter) {
        bool any = false;
        for (auto f : remaining) any = any || f != 0;
        if (!any) break;
        ProgramReport attempt = program_two_pulse(p, targets, remaining);
        const Matrix& g = attempt.achieved;
        for (int r = 0; r < p.row_count; ++r) {
            for (int c = 0; c < p.col_count; ++c) {
                const std::size_t flat = static_cast<std::size_t>(r) * p.col_count + c;
                if (!remaining[flat]) continue;
                report.iterations[flat] = iter;
                report.clamped[flat] = attempt.clamped[flat];
                if (std::fabs(g(r, c) - targets(r, c)) <= tolerance) {
                    report.converged[flat] = 1;
                    remaining[flat] = 0;
                }
            }
        }
    }
    report.achieved = read_conductances(p);
    return report;
}

Matrix Crossbar::read_conductances(const Partition& p) const {
    check_partition(p);
    Matrix out(p.row_count, p.col_count);
    for (int r = 0; r < p.row_count; ++r)
        for (int c = 0; c < p.col_count; ++c) out(r, c) = g_(p.row_start + r, p.col_start + c);
    return out;
}

void Crossbar::restore_conductances(const Partition& p, const Matrix& values) {
    check_partition(p);
    if (values.rows() != p.row_count || values.cols() != p.col_count)
        throw std::invalid_argument("restore: value shape does not match partition");
    const double g_max = device_.g_max();
    for (int r = 0; r < p.row_count; ++r)
        for (int c = 0; c < p.col_count; ++c) {
            const double g = values(r, c);
            if (!(g >= 0.0 && g <= g_max * (1.0 + 1e-12)))
                throw std::invalid_argument("restore: conductance outside [0, g_max]");
            g_(p.row_start + r, p.col_start + c) = g;
        }
}

// --- value map I/O ----------------------------------------------------------

void write_value_map(std::ostream& out, const ValueMap& map) {
    out << "rows " << map.rows << "\n";
    out << "cols " << map.cols << "\n";
    out << "units " << map.units << "\n";
    out << "seed " << map.seed << "\n";
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            if (c) out << ' ';
            out << format_double(map.values(r, c));
        }
        out << '\n';
    }
}

ValueMap read_value_map(std::istream& in) {
    ValueMap map;
    std::string key;
    auto expect_key = [&](const char* want) {
        if (!(in >> key) || key != want)
            throw std::runtime_error("value map: malformed header");
    };
    expect_key("rows");
    in >> map.rows;
    expect_key("cols");
    in >> map.cols;
    expect_key("units");
    in >> map.units;
    expect_key("seed");
    in >> map.seed;
    if (!in || map.rows < 0 || map.cols < 0)
        throw std::runtime_error("value map: malformed header");
    map.values = Matrix(map.rows, map.cols);
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            std::string tok;
            if (!(in >> tok)) throw std::runtime_error("value map: truncated values");
            char* end = nullptr;
            map.values(r, c) = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str()) throw std::runtime_error("value map: bad value");
        }
    }
    return map;
}

void save_value_map(const std::string& path, const ValueMap& map) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_value_map(out, map);
    if (!out) throw std::runtime_error("write failed: " + path);
}

ValueMap load_value_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_value_map(in);
}

}  // namespace xbar
