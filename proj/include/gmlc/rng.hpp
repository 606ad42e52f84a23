#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace gmlc {

// Deterministic PRNG used everywhere randomness is needed (weight init,
// shuffling, synthetic data). splitmix64 state transition; the uniform
// mapping takes the top 53 bits, so streams are identical across platforms
// (std::uniform_real_distribution is implementation-defined and unusable
// for reproducibility guarantees).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // lo..hi inclusive, Lemire multiply-shift
    int uniform_int(int lo, int hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>((static_cast<__uint128_t>(next_u64()) * span) >> 64);
    }

    // standard normal via Box-Muller; second value cached
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i) {
            int j = uniform_int(0, i);
            std::swap(xs[static_cast<size_t>(i)], xs[static_cast<size_t>(j)]);
        }
    }

private:
    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Stable per-purpose seed derived from one master seed, so e.g. the "shuffle"
// stream does not move when an unrelated config knob changes. FNV-1a over the
// name, mixed with the master seed, then scrambled once.
inline uint64_t substream_seed(uint64_t master, std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ull ^ master;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return Rng(h).next_u64();
}

}  // namespace gmlc
