#pragma once
// Deterministic random stream used everywhere randomness is needed.
// Hand-rolled so outputs are bit-identical across platforms and
// standard libraries.

#include <cmath>
#include <cstdint>

namespace reverb {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double gaussian() {
        // Box-Muller on two fresh uniforms; u1 pushed away from 0.
        double u1 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t state_;
};

// Stable mixing of a base seed with a stream index.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    SplitMix64 rng(base ^ (0x632be59bd9b4e019ULL + stream * 0x9e3779b97f4a7c15ULL));
    return rng.next();
}

} // namespace reverb
