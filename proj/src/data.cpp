#include "xbar/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "xbar/textio.hpp"

namespace xbar {

namespace {
// Pinned FNV-1a of the bundled series file; a mismatch means the file was
// edited or truncated.
constexpr std::uint64_t kAirlineChecksum = 0x093811b8659c1aa6ULL;
}  // namespace

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

AirlineSeries load_airline(const std::string& path) {
    const std::uint64_t checksum = fnv1a_file(path);
    if (checksum != kAirlineChecksum) {
        std::ostringstream msg;
        msg << "airline dataset checksum mismatch for " << path << " (got 0x" << std::hex
            << checksum << ")";
        throw std::runtime_error(msg.str());
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    AirlineSeries series;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string month, value;
        if (!(ls >> month >> value)) throw std::runtime_error("airline dataset: malformed line");
        series.values.push_back(parse_double(value));
    }
    if (static_cast<int>(series.values.size()) != AirlineSeries::kLength)
        throw std::runtime_error("airline dataset: expected 144 observations");
    for (double v : series.values)
        if (!(v > 0.0)) throw std::runtime_error("airline dataset: nonpositive value");
    return series;
}

Normalization Normalization::fit(const double* values, int count, double lo, double hi) {
    Normalization n;
    n.lo = lo;
    n.hi = hi;
    if (count <= 0) throw std::invalid_argument("normalization: empty fit range");
    n.raw_min = values[0];
    n.raw_max = values[0];
    for (int i = 1; i < count; ++i) {
        n.raw_min = std::min(n.raw_min, values[i]);
        n.raw_max = std::max(n.raw_max, values[i]);
    }
    return n;
}

double Normalization::normalize(double v) const {
    const double span = raw_max - raw_min;
    if (span <= 0.0) return 0.5 * (lo + hi);  // constant series
    return lo + (v - raw_min) / span * (hi - lo);
}

double Normalization::denormalize(double n) const {
    const double span = raw_max - raw_min;
    if (span <= 0.0) return raw_min;
    return raw_min + (n - lo) / (hi - lo) * span;
}

RegressionPairs make_regression_pairs(const AirlineSeries& series, double band_lo,
                                      double band_hi) {
    if (static_cast<int>(series.values.size()) < AirlineSeries::kTrain)
        throw std::invalid_argument("regression pairs: series shorter than the training split");
    RegressionPairs pairs;
    pairs.norm = Normalization::fit(series.values.data(), AirlineSeries::kTrain, band_lo, band_hi);
    for (int t = 0; t + 1 < AirlineSeries::kTrain; ++t) {
        pairs.inputs.push_back({pairs.norm.normalize(series.values[t])});
        pairs.targets.push_back({pairs.norm.normalize(series.values[t + 1])});
    }
    return pairs;
}

// --- PBM ----------------------------------------------------------------------

namespace {

int pbm_next_int(std::istream& in) {
    // skips whitespace and '#' comments per the netpbm grammar
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v;
    if (!(in >> v)) throw std::runtime_error("pbm: malformed header");
    return v;
}

}  // namespace

SilhouetteFrame load_pbm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P1" && magic != "P4") throw std::runtime_error("pbm: unsupported format " + magic);
    const int cols = pbm_next_int(in);
    const int rows = pbm_next_int(in);
    if (rows != SilhouetteFrame::kRows || cols != SilhouetteFrame::kCols)
        throw std::runtime_error("pbm: silhouette frames must be 88x128");
    SilhouetteFrame frame;
    if (magic == "P1") {
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) frame.at(r, c) = pbm_next_int(in) ? 1 : 0;
    } else {
        in.get();  // single whitespace after the header
        const int row_bytes = (cols + 7) / 8;
        std::vector<char> buf(static_cast<std::size_t>(row_bytes) * rows);
        if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size())))
            throw std::runtime_error("pbm: truncated raster");
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const std::uint8_t byte = static_cast<std::uint8_t>(buf[r * row_bytes + c / 8]);
                frame.at(r, c) = (byte >> (7 - c % 8)) & 1;
            }
    }
    return frame;
}

void save_pbm(const std::string& path, const SilhouetteFrame& frame) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P1\n" << SilhouetteFrame::kCols << ' ' << SilhouetteFrame::kRows << '\n';
    for (int r = 0; r < SilhouetteFrame::kRows; ++r) {
        for (int c = 0; c < SilhouetteFrame::kCols; ++c) {
            out << (frame.at(r, c) ? '1' : '0');
            out << (c + 1 == SilhouetteFrame::kCols ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// --- width features -----------------------------------------------------------

Vector width_profile(const SilhouetteFrame& frame) {
    Vector widths(SilhouetteFrame::kRows, 0.0);
    for (int r = 0; r < SilhouetteFrame::kRows; ++r) {
        int left = -1, right = -1;
        for (int c = 0; c < SilhouetteFrame::kCols; ++c) {
            if (frame.at(r, c)) {
                left = c;
                break;
            }
        }
        if (left < 0) continue;
        for (int c = SilhouetteFrame::kCols - 1; c >= left; --c) {
            if (frame.at(r, c)) {
                right = c;
                break;
            }
        }
        widths[r] = right - left + 1;
    }
    return widths;
}

Vector downsample_profile(const Vector& profile, int out_dim) {
    const int n = static_cast<int>(profile.size());
    if (n != SilhouetteFrame::kRows)
        throw std::invalid_argument("downsample: expected a 128-dimensional profile");
    if (out_dim < 1 || out_dim > n) throw std::invalid_argument("downsample: bad output size");
    Vector out(out_dim, 0.0);
    const double ratio = static_cast<double>(n) / out_dim;  // input bins per output bin
    for (int j = 0; j < out_dim; ++j) {
        const double lo = j * ratio;
        const double hi = (j + 1) * ratio;
        double mass = 0.0;
        for (int i = static_cast<int>(lo); i < n && i < hi; ++i) {
            const double cover = std::min(hi, static_cast<double>(i + 1)) -
                                 std::max(lo, static_cast<double>(i));
            mass += profile[i] * cover;
        }
        out[j] = mass / ratio;
    }
    return out;
}

std::vector<int> detect_gait_cycles(const Vector& total_widths, int k_harmonics) {
    const int n = static_cast<int>(total_widths.size());
    if (n < 8) throw std::invalid_argument("cycle detection: signal too short");
    if (k_harmonics < 1) throw std::invalid_argument("cycle detection: need k >= 1");

    // Direct DFT; videos are at most a few hundred frames. Capping below n/2
    // keeps every retained frequency a proper conjugate pair.
    const int kept = std::min(k_harmonics, (n - 1) / 2);
    std::vector<double> re(kept + 1, 0.0), im(kept + 1, 0.0);
    for (int k = 0; k <= kept; ++k) {
        for (int t = 0; t < n; ++t) {
            const double ang = -2.0 * M_PI * k * t / n;
            re[k] += total_widths[t] * std::cos(ang);
            im[k] += total_widths[t] * std::sin(ang);
        }
    }
    Vector smooth(n, 0.0);
    for (int t = 0; t < n; ++t) {
        double acc = re[0] / n;  // DC
        for (int k = 1; k <= kept; ++k) {
            const double ang = 2.0 * M_PI * k * t / n;
            // conjugate-pair contribution of frequency k
            acc += 2.0 / n * (re[k] * std::cos(ang) - im[k] * std::sin(ang));
        }
        smooth[t] = acc;
    }

    // Constant signals reconstruct with ~1e-13 ripple; treat them as flat.
    double lo = smooth[0], hi = smooth[0];
    for (double v : smooth) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo <= 1e-9 * std::max(1.0, std::fabs(hi))) return {};

    // Valley rule: last index of a flat-or-descending run that rises next.
    // A symmetric sinusoid sampled off-phase makes exact two-sample plateaus,
    // so walk plateaus back to check that the valley was entered by a descent.
    std::vector<int> boundaries;
    for (int t = 1; t + 1 < n; ++t) {
        if (!(smooth[t] < smooth[t + 1]) || smooth[t] > smooth[t - 1]) continue;
        int u = t;
        while (u >= 1 && smooth[u - 1] == smooth[t]) --u;
        if (u >= 1 && smooth[u - 1] > smooth[t]) boundaries.push_back(t);
    }
    return boundaries;
}

std::vector<GaitSequence> segment_sequences(const std::vector<Vector>& features,
                                            const std::vector<int>& boundaries, int window) {
    std::vector<GaitSequence> out;
    const int n = static_cast<int>(features.size());
    for (int b : boundaries) {
        if (b < 0 || b + window > n) continue;  // overruns the video
        GaitSequence seq;
        seq.frames.assign(features.begin() + b, features.begin() + b + window);
        out.push_back(std::move(seq));
    }
    return out;
}

// --- synthetic walkers ----------------------------------------------------------

namespace {

struct WalkerShape {
    double period;        // frames per gait cycle
    double head_r;        // head half-width
    double shoulder_hw;   // torso half-width at the shoulders
    double waist_hw;      // torso half-width at the waist
    double leg_amp;       // max leg half-spread at the feet
    double leg_hw;        // half-width of one leg
    double arm_amp;       // arm swing extent
    double arm_phase;     // arm swing offset relative to the legs
};

WalkerShape class_walker(int class_id) {
    const double c = static_cast<double>(class_id);
    WalkerShape w;
    w.period = 28.0 + 2.8 * c;
    w.head_r = 5.0 + 0.9 * c;
    w.shoulder_hw = 10.0 + 2.4 * c;
    w.waist_hw = 8.0 + 1.6 * c;
    w.leg_amp = 6.0 + 2.2 * c;
    w.leg_hw = 3.0 + 0.4 * c;
    w.arm_amp = 2.0 + 1.3 * c;
    w.arm_phase = 0.11 * c;
    return w;
}

void fill_span(SilhouetteFrame& frame, int row, double center, double half_width) {
    if (half_width <= 0.0) return;
    const int lo = std::max(0, static_cast<int>(std::ceil(center - half_width)));
    const int hi = std::min(SilhouetteFrame::kCols - 1,
                            static_cast<int>(std::floor(center + half_width)));
    for (int c = lo; c <= hi; ++c) frame.at(row, c) = 1;
}

}  // namespace

std::vector<SilhouetteFrame> render_gait_video(int class_id, std::uint64_t video_seed,
                                               const GaitGenConfig& cfg) {
    WalkerShape w = class_walker(class_id);
    Rng rng(video_seed);
    const double scale = 1.0 + cfg.scale_jitter * rng.uniform(-1.0, 1.0);
    // per-part proportion jitter: clothing/viewpoint analogues that deform the
    // profile shape, not just its scale
    w.head_r *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    w.shoulder_hw *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    w.waist_hw *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    w.leg_amp *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    w.leg_hw *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    w.arm_amp *= 1.0 + cfg.shape_jitter * rng.uniform(-1.0, 1.0);
    const double period = w.period * (1.0 + cfg.period_jitter * rng.uniform(-1.0, 1.0));
    const double phase0 = rng.next_unit();
    const double cx = 44.0;

    std::vector<SilhouetteFrame> frames(cfg.frames_per_video);
    for (int t = 0; t < cfg.frames_per_video; ++t) {
        SilhouetteFrame& frame = frames[t];
        const double phase = std::fmod(t / period + phase0, 1.0);
        const double stride = std::fabs(std::sin(M_PI * phase));       // legs apart at mid-swing
        const double swing = std::sin(2.0 * M_PI * (phase + w.arm_phase));
        auto noisy = [&](double v) {
            return std::max(0.0, v + cfg.width_noise * rng.gaussian());
        };
        for (int r = 6; r < 19; ++r) {  // head
            const double y = (r - 12.5) / 6.5;
            if (y * y < 1.0)
                fill_span(frame, r, cx, noisy(scale * w.head_r * std::sqrt(1.0 - y * y)));
        }
        for (int r = 19; r < 66; ++r) {  // torso with arm swing
            const double u = (r - 19.0) / 47.0;
            double hw = w.shoulder_hw + (w.waist_hw - w.shoulder_hw) * u;
            if (r >= 24 && r < 56) {
                const double arm_profile = std::sin(M_PI * (r - 24.0) / 32.0);
                hw += w.arm_amp * std::fabs(swing) * arm_profile;
            }
            fill_span(frame, r, cx, noisy(scale * hw));
        }
        for (int r = 66; r < 120; ++r) {  // legs, spread grows toward the feet
            const double u = (r - 66.0) / 54.0;
            const double spread = scale * w.leg_amp * stride * u;
            const double hw = noisy(scale * w.leg_hw);
            fill_span(frame, r, cx - spread, hw);
            fill_span(frame, r, cx + spread, hw);
        }
    }
    return frames;
}

GaitDataset synth_gait_dataset(std::uint64_t seed, const GaitGenConfig& cfg) {
    if (cfg.n_classes < 2) throw std::invalid_argument("gait generator: need at least 2 classes");
    GaitDataset data;
    data.n_classes = cfg.n_classes;

    const int n_videos = cfg.n_classes * cfg.videos_per_class;
    std::vector<std::vector<GaitSequence>> per_video(n_videos);
#pragma omp parallel for schedule(dynamic)
    for (int v = 0; v < n_videos; ++v) {
        const int class_id = v / cfg.videos_per_class;
        const std::uint64_t video_seed = derive_seed(seed, 0x90e0 + v);
        const std::vector<SilhouetteFrame> frames = render_gait_video(class_id, video_seed, cfg);

        std::vector<Vector> features;
        Vector totals;
        features.reserve(frames.size());
        totals.reserve(frames.size());
        for (const SilhouetteFrame& f : frames) {
            const Vector profile = width_profile(f);
            double total = 0.0;
            for (double x : profile) total += x;
            totals.push_back(total);
            Vector feat = downsample_profile(profile, GaitSequence::kFeatures);
            for (double& x : feat) x *= cfg.feature_gain / SilhouetteFrame::kCols;
            features.push_back(std::move(feat));
        }
        std::vector<GaitSequence> seqs =
            segment_sequences(features, detect_gait_cycles(totals));
        for (GaitSequence& s : seqs) s.label = class_id;
        per_video[v] = std::move(seqs);
    }

    // Stratified split, shuffled per class in video order (deterministic).
    for (int c = 0; c < cfg.n_classes; ++c) {
        std::vector<GaitSequence> pool;
        for (int v = c * cfg.videos_per_class; v < (c + 1) * cfg.videos_per_class; ++v)
            for (GaitSequence& s : per_video[v]) pool.push_back(std::move(s));
        Rng split_rng(derive_seed(seed, 0x5917 + c));
        shuffle(pool, split_rng);
        const int n_train = static_cast<int>(std::floor(pool.size() * cfg.train_fraction));
        for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
            if (i < n_train)
                data.train.push_back(std::move(pool[i]));
            else
                data.test.push_back(std::move(pool[i]));
        }
    }
    return data;
}

std::vector<Vector> class_mean_profiles(const GaitDataset& data) {
    std::vector<Vector> means(data.n_classes, Vector(GaitSequence::kFeatures, 0.0));
    std::vector<long> counts(data.n_classes, 0);
    auto accumulate = [&](const std::vector<GaitSequence>& seqs) {
        for (const GaitSequence& s : seqs) {
            for (const Vector& f : s.frames)
                for (int k = 0; k < GaitSequence::kFeatures; ++k) means[s.label][k] += f[k];
            counts[s.label] += static_cast<long>(s.frames.size());
        }
    };
    accumulate(data.train);
    accumulate(data.test);
    for (int c = 0; c < data.n_classes; ++c)
        if (counts[c] > 0)
            for (double& v : means[c]) v /= static_cast<double>(counts[c]);
    return means;
}

void save_sequences(const std::string& path, const std::vector<GaitSequence>& seqs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const GaitSequence& s : seqs) {
        out << s.label;
        for (const Vector& f : s.frames)
            for (double v : f) out << ' ' << format_double(v);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<GaitSequence> load_sequences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<GaitSequence> seqs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        GaitSequence s;
        if (!(ls >> s.label)) throw std::runtime_error("sequence file: malformed label");
        s.frames.assign(GaitSequence::kFrames, Vector(GaitSequence::kFeatures, 0.0));
        std::string tok;
        for (int t = 0; t < GaitSequence::kFrames; ++t)
            for (int k = 0; k < GaitSequence::kFeatures; ++k) {
                if (!(ls >> tok)) throw std::runtime_error("sequence file: truncated record");
                s.frames[t][k] = parse_double(tok);
            }
        seqs.push_back(std::move(s));
    }
    return seqs;
}

}  // namespace xbar
