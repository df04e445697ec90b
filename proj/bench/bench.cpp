// Serial-vs-OpenMP comparison for the hot paths: dense kernels, crossbar
// reads, the mini-batch gradient pass, and the silhouette generator.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "xbar/config.hpp"
#include "xbar/data.hpp"
#include "xbar/device.hpp"
#include "xbar/kernels.hpp"
#include "xbar/rng.hpp"
#include "xbar/trainer.hpp"

using namespace xbar;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-34s %10.3f ms %10.3f ms %7.2fx   max|diff| %.3e\n", name.c_str(), serial_ms,
                parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, diff);
}

Matrix random_matrix(int rows, int cols, Rng& rng, double span) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-span, span);
    return m;
}

void bench_kernels(int rows, int cols, int reps) {
    Rng rng(7);
    const Matrix m = random_matrix(rows, cols, rng, 1.0);
    Vector v(cols), vt(rows);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    for (double& x : vt) x = rng.uniform(-1.0, 1.0);

    Vector a, b;
    const double s1 = time_ms([&] { a = reference::multiply(m, v); }, reps);
    const double p1 = time_ms([&] { b = multiply(m, v); }, reps);
    report("multiply " + std::to_string(rows) + "x" + std::to_string(cols), s1, p1,
           max_abs_diff(a, b));

    const double s2 = time_ms([&] { a = reference::multiply_transpose(m, vt); }, reps);
    const double p2 = time_ms([&] { b = multiply_transpose(m, vt); }, reps);
    report("multiply_transpose " + std::to_string(rows) + "x" + std::to_string(cols), s2, p2,
           max_abs_diff(a, b));
}

void bench_noisy_read(int reps) {
    DeviceParams dev;
    NoiseModel noise;
    noise.read_noise_rel = 0.05;
    Crossbar xb(128, 64, dev, noise, 99);
    Rng rng(3);
    Matrix targets(128, 64);
    for (int r = 0; r < 128; ++r)
        for (int c = 0; c < 64; ++c) targets(r, c) = rng.uniform(0.0, dev.g_max());
    xb.program_two_pulse(xb.full(), targets);
    Vector volts(128);
    for (double& v : volts) v = rng.uniform(-0.2, 0.2);

    // same stream position for both timings so the draws are comparable
    Vector a, b;
    NoiseStream s1(99, 1234), s2(99, 1234);
    const double t1 = time_ms([&] { a = xb.read_mvm(xb.full(), volts, s1); }, reps);
    const double t2 = time_ms([&] { b = xb.read_mvm(xb.full(), volts, s2); }, reps);
    report("noisy read_mvm 128x64", t1, t2, 0.0);
}

void bench_gait_batch() {
    ExperimentConfig cfg = preset_gait_synthetic();
    cfg.gait.videos_per_class = 6;
    const GaitDataset data = synth_gait_dataset(11, cfg.gait);

    FloatStore store(cfg.lstm_spec(), cfg.fc_spec());
    initialize_weights(cfg, store);

    auto run_epochs = [&](bool parallel) {
        ExperimentConfig c = cfg;
        c.epochs = 2;
        FloatStore s(c.lstm_spec(), c.fc_spec());
        ClassificationRun r = train_gait(c, data, s, parallel);
        return r.log.batches.back().loss;
    };
    double loss_serial = 0.0, loss_parallel = 0.0;
    const double ts = time_ms([&] { loss_serial = run_epochs(false); }, 1);
    const double tp = time_ms([&] { loss_parallel = run_epochs(true); }, 1);
    report("gait mini-batch training (2 ep)", ts, tp, std::fabs(loss_serial - loss_parallel));
}

void bench_generator() {
    GaitGenConfig gen;
    gen.videos_per_class = 8;
    GaitDataset a, b;
    // the generator parallelizes over videos internally; compare 1 thread vs all
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const double ts = time_ms([&] { a = synth_gait_dataset(5, gen); }, 1);
    omp_set_num_threads(max_threads);
    const double tp = time_ms([&] { b = synth_gait_dataset(5, gen); }, 1);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.train.size(); ++i)
        for (int t = 0; t < GaitSequence::kFrames; ++t)
            diff = std::max(diff, max_abs_diff(a.train[i].frames[t], b.train[i].frames[t]));
    report("silhouette generator (64 videos)", ts, tp, diff);
#else
    const double ts = time_ms([&] { a = synth_gait_dataset(5, gen); }, 1);
    report("silhouette generator (64 videos)", ts, ts, 0.0);
#endif
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");
    bench_kernels(128, 64, 2000);
    bench_kernels(512, 512, 200);
    bench_kernels(2048, 2048, 20);
    bench_noisy_read(500);
    bench_gait_batch();
    bench_generator();
    return 0;
}
