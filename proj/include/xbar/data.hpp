#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbar/matrix.hpp"
#include "xbar/rng.hpp"

namespace xbar {

// --- airline passenger series ------------------------------------------------

// Monthly totals, Jan 1949 - Dec 1960; first 96 points train, last 48 test.
struct AirlineSeries {
    static constexpr int kLength = 144;
    static constexpr int kTrain = 96;
    static constexpr int kTest = 48;

    std::vector<double> values;
};

// Loads the bundled series file and verifies its pinned checksum.
AirlineSeries load_airline(const std::string& path);

// FNV-1a over the raw file bytes, used to pin the bundled dataset.
std::uint64_t fnv1a_file(const std::string& path);

// Affine min-max normalization fitted on the training split only; a
// degenerate (constant) range maps everything to the band midpoint.
struct Normalization {
    double raw_min = 0.0;
    double raw_max = 1.0;
    double lo = 0.0;  // normalized band
    double hi = 1.0;

    static Normalization fit(const double* values, int count, double lo, double hi);
    double normalize(double v) const;
    double denormalize(double n) const;
};

// One-step-ahead prediction pairs: input value(t), target value(t+1), both
// normalized with training-split statistics.
struct RegressionPairs {
    std::vector<Vector> inputs;   // T x 1
    std::vector<Vector> targets;  // T x 1
    Normalization norm;
};

RegressionPairs make_regression_pairs(const AirlineSeries& series, double band_lo = 0.0,
                                      double band_hi = 1.0);

// --- gait preprocessing -------------------------------------------------------

struct SilhouetteFrame {
    static constexpr int kRows = 128;
    static constexpr int kCols = 88;

    std::vector<std::uint8_t> pixels;  // row-major, nonzero = foreground

    SilhouetteFrame() : pixels(static_cast<std::size_t>(kRows) * kCols, 0) {}
    std::uint8_t& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * kCols + c]; }
    std::uint8_t at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * kCols + c]; }
};

SilhouetteFrame load_pbm(const std::string& path);
void save_pbm(const std::string& path, const SilhouetteFrame& frame);

// Per-row silhouette width: rightmost - leftmost foreground column + 1,
// zero for empty rows.
Vector width_profile(const SilhouetteFrame& frame);

// Area-weighted rebinning from 128 to `out_dim` bins; preserves constants and
// total mass (up to the bin-width factor).
Vector downsample_profile(const Vector& profile, int out_dim = 50);

// Gait-cycle boundaries: keep the DC term and the k lowest nonzero frequency
// pairs of the total-width signal, invert the DFT, and return the indices of
// strict local minima of the smoothed signal.
std::vector<int> detect_gait_cycles(const Vector& total_widths, int k_harmonics = 3);

struct GaitSequence {
    static constexpr int kFrames = 25;
    static constexpr int kFeatures = 50;

    std::vector<Vector> frames;  // kFrames x kFeatures
    int label = 0;
};

// Fixed-length windows aligned to cycle starts; windows overrunning the video
// are dropped. Labels are left at 0 for the caller to fill.
std::vector<GaitSequence> segment_sequences(const std::vector<Vector>& features,
                                            const std::vector<int>& boundaries,
                                            int window = GaitSequence::kFrames);

// --- synthetic gait dataset ---------------------------------------------------

// Parametric walkers, one per class: body proportions and gait timing are
// class signatures, while per-video nuisances (overall scale, speed and phase
// jitter, width noise) play the role of the recording covariates. Frames are
// rendered as real silhouettes and pushed through the actual preprocessing
// pipeline above.
struct GaitGenConfig {
    int n_classes = 8;
    int videos_per_class = 48;
    int frames_per_video = 84;
    double scale_jitter = 0.05;      // +- fraction of body width per video
    double shape_jitter = 0.0;       // +- per-part proportion jitter per video
    double period_jitter = 0.02;     // +- fraction of gait period per video
    double width_noise = 0.5;        // pixels of per-row edge noise
    double train_fraction = 0.9;     // stratified split
    // feature units per full frame width; larger features let the network
    // solve the task with proportionally smaller input weights, which sets
    // where solutions sit inside the representable conductance window
    double feature_gain = 1.0;
};

struct GaitDataset {
    std::vector<GaitSequence> train;
    std::vector<GaitSequence> test;
    int n_classes = 8;
};

// Renders all frames of one video of the given class walker.
std::vector<SilhouetteFrame> render_gait_video(int class_id, std::uint64_t video_seed,
                                               const GaitGenConfig& cfg);

GaitDataset synth_gait_dataset(std::uint64_t seed, const GaitGenConfig& cfg);

// Per-class mean of all per-frame feature vectors, for separation checks.
std::vector<Vector> class_mean_profiles(const GaitDataset& data);

// One line per sequence: label then 25*50 feature values.
void save_sequences(const std::string& path, const std::vector<GaitSequence>& seqs);
std::vector<GaitSequence> load_sequences(const std::string& path);

}  // namespace xbar
