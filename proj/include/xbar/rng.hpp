#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace xbar {

// SplitMix64 finalizer. All randomness in the simulator derives from this so
// that runs are reproducible across compilers and thread counts.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Derives an independent sub-seed from a seed and a label.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
    return mix64(seed + kGolden * (label + 1));
}

inline double u64_to_unit(std::uint64_t x) {
    // 53-bit mantissa, [0, 1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Sequential generator (SplitMix64 stream).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }
    double next_unit() { return u64_to_unit(next_u64()); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
    double gaussian() {
        // Box-Muller, two fresh draws per sample
        double u1 = static_cast<double>((next_u64() >> 11) | 1u) * 0x1.0p-53;  // (0, 1)
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    // Unbiased bounded draw via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    std::uint64_t state_;
};

// Fisher-Yates with our own generator; std::shuffle is implementation-defined.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// Counter-based Gaussian stream. Draw k is a pure function of (key, k), so
// parallel loops can evaluate draws by index in any order and still match the
// serial stream bit for bit.
class NoiseStream {
public:
    NoiseStream() : key_(0) {}
    NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(mix64(seed ^ mix64(stream_id + 0x51ab5e3ULL))) {}

    double gaussian_at(std::uint64_t index) const {
        std::uint64_t a = mix64(key_ + (2 * index + 0) * kGolden);
        std::uint64_t b = mix64(key_ + (2 * index + 1) * kGolden);
        double u1 = static_cast<double>((a >> 11) | 1u) * 0x1.0p-53;  // (0, 1)
        double u2 = u64_to_unit(b);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    double gaussian() { return gaussian_at(counter_++); }
    void advance(std::uint64_t n) { counter_ += n; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace xbar
