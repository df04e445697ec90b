#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "xbar/device.hpp"
#include "xbar/kernels.hpp"
#include "xbar/rng.hpp"

using namespace xbar;

namespace {

Crossbar make_crossbar(int rows, int cols, std::uint64_t seed = 42, NoiseModel noise = {}) {
    return Crossbar(rows, cols, DeviceParams{}, noise, seed);
}

Matrix random_targets(int rows, int cols, Rng& rng, double g_max) {
    Matrix t(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t(r, c) = rng.uniform(0.0, g_max);
    return t;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("init_array lands every cell at 0 S when noiseless") {
    Crossbar xb = make_crossbar(8, 6);
    xb.init_array();
    const Matrix g = xb.read_conductances(xb.full());
    CHECK(max_abs(g) == 0.0);
}

TEST_CASE("init_array is deterministic for a fixed seed") {
    NoiseModel noise;
    noise.program_noise_abs = 1e-6;
    Crossbar a = make_crossbar(16, 12, 7, noise);
    Crossbar b = make_crossbar(16, 12, 7, noise);
    a.init_array();
    b.init_array();
    CHECK(a.read_conductances(a.full()) == b.read_conductances(b.full()));

    Crossbar c = make_crossbar(16, 12, 8, noise);
    c.init_array();
    CHECK_FALSE(a.read_conductances(a.full()) == c.read_conductances(c.full()));
}

TEST_CASE("two-pulse programming follows the gate-voltage model") {
    Crossbar xb = make_crossbar(1, 1);
    const double g_max = xb.device().g_max();
    CHECK(g_max == doctest::Approx((1.6 - 1.0) / 1.02e4).epsilon(1e-15));

    SUBCASE("in-range target lands exactly") {
        Matrix t(1, 1, 2e-5);
        ProgramReport r = xb.program_two_pulse(xb.full(), t);
        CHECK(r.achieved(0, 0) == doctest::Approx(2e-5).epsilon(1e-12));
        CHECK(r.clamp_count() == 0);
    }
    SUBCASE("target above g_max clamps at the gate ceiling and flags") {
        Matrix t(1, 1, 1e-4);
        ProgramReport r = xb.program_two_pulse(xb.full(), t);
        CHECK(r.achieved(0, 0) == doctest::Approx(g_max).epsilon(1e-12));
        CHECK(r.cell_clamped(0, 0));
    }
    SUBCASE("negative target clamps to zero and flags") {
        Matrix t(1, 1, -1e-5);
        ProgramReport r = xb.program_two_pulse(xb.full(), t);
        CHECK(r.achieved(0, 0) == 0.0);
        CHECK(r.cell_clamped(0, 0));
    }
}

TEST_CASE("all-false mask leaves the crossbar untouched") {
    Crossbar xb = make_crossbar(4, 4);
    Rng rng(5);
    Matrix pattern = random_targets(4, 4, rng, xb.device().g_max());
    xb.program_two_pulse(xb.full(), pattern);
    const Matrix before = xb.read_conductances(xb.full());

    Matrix other(4, 4, 1e-5);
    std::vector<std::uint8_t> mask(16, 0);
    xb.program_two_pulse(xb.full(), other, mask);
    CHECK(xb.read_conductances(xb.full()) == before);
}

TEST_CASE("noiseless two-pulse programming is idempotent") {
    Crossbar xb = make_crossbar(6, 5);
    Rng rng(9);
    Matrix t = random_targets(6, 5, rng, xb.device().g_max());
    xb.program_two_pulse(xb.full(), t);
    const Matrix once = xb.read_conductances(xb.full());
    xb.program_two_pulse(xb.full(), t);
    CHECK(xb.read_conductances(xb.full()) == once);
}

TEST_CASE("read_mvm: diagonal conductances obey Ohm's law") {
    DeviceParams dev;
    dev.v_gate_max = 3.1;       // widen the gate window so the 1e-4 diagonal is in range
    dev.g_max_override = 2e-4;
    Crossbar xb(2, 2, dev, NoiseModel{}, 42);
    Matrix t(2, 2, 0.0);
    t(0, 0) = 1e-4;
    t(1, 1) = 1e-4;
    xb.program_two_pulse(xb.full(), t);
    const Vector i = xb.read_mvm(xb.full(), {0.1, 0.2});
    CHECK(i[0] == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(i[1] == doctest::Approx(2e-5).epsilon(1e-12));

    const Vector zero = xb.read_mvm(xb.full(), {0.0, 0.0});
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);
}

TEST_CASE("noiseless reads match the dense oracle on random partitions") {
    Crossbar xb = make_crossbar(12, 9);
    Rng rng(11);
    Matrix t = random_targets(12, 9, rng, xb.device().g_max());
    xb.program_two_pulse(xb.full(), t);

    for (int trial = 0; trial < 20; ++trial) {
        Partition p;
        p.row_start = static_cast<int>(rng.next_below(6));
        p.col_start = static_cast<int>(rng.next_below(5));
        p.row_count = 1 + static_cast<int>(rng.next_below(12 - p.row_start));
        p.col_count = 1 + static_cast<int>(rng.next_below(9 - p.col_start));
        Vector v(p.row_count);
        for (double& x : v) x = rng.uniform(-0.2, 0.2);

        const Matrix g = xb.read_conductances(p);
        const Vector want = reference::multiply_transpose(g, v);
        const Vector got = xb.read_mvm(p, v);
        for (int c = 0; c < p.col_count; ++c)
            CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-15));

        Vector vc(p.col_count);
        for (double& x : vc) x = rng.uniform(-0.2, 0.2);
        const Vector want_t = reference::multiply(g, vc);
        const Vector got_t = xb.read_mvm_transposed(p, vc);
        for (int r = 0; r < p.row_count; ++r)
            CHECK(got_t[r] == doctest::Approx(want_t[r]).epsilon(1e-15));
    }
}

TEST_CASE("transposed read equals a forward read of the explicit transpose") {
    Crossbar xb = make_crossbar(7, 5);
    Rng rng(13);
    Matrix t = random_targets(7, 5, rng, xb.device().g_max());
    xb.program_two_pulse(xb.full(), t);
    const Matrix g = xb.read_conductances(xb.full());

    // mirror crossbar holding G^T
    Crossbar mirror = make_crossbar(5, 7);
    Matrix gt(5, 7);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 5; ++c) gt(c, r) = g(r, c);
    mirror.program_two_pulse(mirror.full(), gt);

    Vector v(5);
    for (double& x : v) x = rng.uniform(-0.2, 0.2);
    const Vector a = xb.read_mvm_transposed(xb.full(), v);
    const Vector b = mirror.read_mvm(mirror.full(), v);
    for (int r = 0; r < 7; ++r) CHECK(a[r] == doctest::Approx(b[r]).epsilon(1e-12));
}

TEST_CASE("reads never mutate conductance") {
    NoiseModel noise;
    noise.read_noise_rel = 0.05;  // even noisy reads must leave state alone
    Crossbar xb = make_crossbar(8, 8, 21, noise);
    Rng rng(17);
    Matrix t = random_targets(8, 8, rng, xb.device().g_max());
    xb.program_two_pulse(xb.full(), t);
    const Matrix before = xb.read_conductances(xb.full());
    Vector v(8, 0.1);
    for (int i = 0; i < 10000; ++i) xb.read_mvm(xb.full(), v);
    CHECK(xb.read_conductances(xb.full()) == before);
}

TEST_CASE("read voltage limit is enforced") {
    Crossbar xb = make_crossbar(2, 2);
    CHECK_THROWS_AS(xb.read_mvm(xb.full(), {0.3, 0.0}), std::domain_error);
    CHECK_THROWS_AS(xb.read_mvm(xb.full(), {0.1}), std::invalid_argument);
    CHECK_NOTHROW(xb.read_mvm(xb.full(), {0.2, -0.2}));
}

TEST_CASE("conductances stay inside [0, g_max] under random operation sequences") {
    NoiseModel noise;
    noise.program_noise_abs = 5e-6;
    Crossbar xb = make_crossbar(6, 6, 3, noise);
    xb.init_array();
    Rng rng(23);
    const double g_max = xb.device().g_max();
    for (int step = 0; step < 200; ++step) {
        const int op = static_cast<int>(rng.next_below(3));
        if (op == 0) {
            Matrix t(6, 6);
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) t(r, c) = rng.uniform(-2.0 * g_max, 2.0 * g_max);
            xb.program_two_pulse(xb.full(), t);
        } else if (op == 1) {
            Matrix t = random_targets(6, 6, rng, g_max);
            xb.program_write_verify(xb.full(), t, 1e-6, 3);
        } else {
            Vector v(6);
            for (double& x : v) x = rng.uniform(-0.2, 0.2);
            xb.read_mvm(xb.full(), v);
        }
        const Matrix g = xb.read_conductances(xb.full());
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) {
                CHECK(g(r, c) >= 0.0);
                CHECK(g(r, c) <= g_max);
            }
    }
}

TEST_CASE("fixed seed reproduces the full conductance trajectory") {
    NoiseModel noise;
    noise.program_noise_abs = 2e-6;
    noise.read_noise_rel = 0.02;
    auto trajectory = [&] {
        Crossbar xb = make_crossbar(5, 4, 77, noise);
        xb.init_array();
        Rng rng(31);
        Matrix maps(0, 0);
        for (int k = 0; k < 5; ++k) {
            Matrix t = random_targets(5, 4, rng, xb.device().g_max());
            xb.program_two_pulse(xb.full(), t);
        }
        return xb.read_conductances(xb.full());
    };
    CHECK(trajectory() == trajectory());
}

TEST_CASE("write-and-verify") {
    SUBCASE("noiseless programming converges in one iteration") {
        Crossbar xb = make_crossbar(4, 4);
        Rng rng(37);
        Matrix t = random_targets(4, 4, rng, xb.device().g_max());
        ProgramReport r = xb.program_write_verify(xb.full(), t, 1e-9, 10);
        CHECK(r.all_converged());
        for (int i : r.iterations) CHECK(i == 1);
    }
    SUBCASE("unreachable target stays unconverged after max_iters") {
        Crossbar xb = make_crossbar(1, 1);
        Matrix t(1, 1, 2e-4);  // far above g_max
        ProgramReport r = xb.program_write_verify(xb.full(), t, 1e-9, 5);
        CHECK_FALSE(r.all_converged());
        CHECK(r.iterations[0] == 5);
        CHECK(r.cell_clamped(0, 0));
    }
    SUBCASE("monte-carlo convergence under program noise") {
        NoiseModel noise;
        noise.program_noise_abs = 1e-6;
        Crossbar xb = make_crossbar(20, 10, 5, noise);  // 200 cells per trial
        Rng rng(41);
        int converged = 0, total = 0;
        for (int trial = 0; trial < 5; ++trial) {  // 1000 random targets overall
            Matrix t = random_targets(20, 10, rng, xb.device().g_max());
            ProgramReport r = xb.program_write_verify(xb.full(), t, 2e-6, 10);
            total += 200;
            converged += 200 - r.unconverged_count();
        }
        CHECK(total == 1000);
        CHECK(converged >= 990);
    }
}

TEST_CASE("quantization snaps programmed values to uniform levels") {
    NoiseModel noise;
    noise.quantization_levels = 5;
    Crossbar xb = make_crossbar(1, 1, 42, noise);
    const double g_max = xb.device().g_max();
    const double step = g_max / 4.0;
    Matrix t(1, 1, 0.3 * g_max);  // nearest level is step (0.25 g_max)
    ProgramReport r = xb.program_two_pulse(xb.full(), t);
    CHECK(r.achieved(0, 0) == doctest::Approx(step).epsilon(1e-12));
}

TEST_CASE("zero-sized partitions are legal no-ops") {
    Crossbar xb = make_crossbar(4, 4);
    Partition empty{2, 0, 1, 0};
    CHECK(xb.read_mvm(empty, {}).empty());
    CHECK(xb.read_conductances(empty).size() == 0);
    ProgramReport r = xb.program_two_pulse(empty, Matrix(0, 0));
    CHECK(r.clamp_count() == 0);
}

TEST_CASE("value map files round-trip bit-exactly") {
    Rng rng(53);
    ValueMap map;
    map.rows = 9;
    map.cols = 7;
    map.units = "S";
    map.seed = 4242;
    map.values = Matrix(9, 7);
    for (int r = 0; r < 9; ++r)
        for (int c = 0; c < 7; ++c)
            map.values(r, c) = rng.uniform(-1.0, 1.0) * std::pow(10.0, -(int)rng.next_below(20));

    const std::string path = temp_path("xbar_map_roundtrip.txt");
    save_value_map(path, map);
    const ValueMap back = load_value_map(path);
    CHECK(back.rows == map.rows);
    CHECK(back.cols == map.cols);
    CHECK(back.units == map.units);
    CHECK(back.seed == map.seed);
    CHECK(back.values == map.values);
    std::filesystem::remove(path);
}

TEST_CASE("partition overlap detection") {
    Partition a{0, 34, 0, 60};
    Partition b{0, 32, 60, 1};
    CHECK_FALSE(a.overlaps(b));
    Partition c{10, 10, 50, 20};
    CHECK(a.overlaps(c));
    Partition empty{0, 0, 0, 0};
    CHECK_FALSE(a.overlaps(empty));
}
