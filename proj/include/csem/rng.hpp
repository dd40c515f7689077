#pragma once

#include <cmath>
#include <cstdint>

namespace csem {

// Deterministic splitmix64 generator. Standard-library distributions are
// implementation defined, so all sampling goes through this to keep runs
// bit-reproducible across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n).
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    // Uniform in [lo, hi] inclusive.
    int64_t next_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller; one value per call (the sibling draw is discarded so the
    // stream position stays a pure function of the call count).
    double next_normal(double mean = 0.0, double stddev = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool next_bool(double p_true) { return next_double() < p_true; }

private:
    uint64_t state_;
};

// Derives an independent stream from a base seed and stream tags. Used to give
// each (trial, example) its own generator regardless of worker scheduling.
inline uint64_t derive_seed(uint64_t base, uint64_t tag_a, uint64_t tag_b = 0) {
    Rng mix(base ^ (0x517cc1b727220a95ULL * (tag_a + 1)) ^ (0x2545f4914f6cdd1dULL * (tag_b + 1)));
    return mix.next_u64();
}

} // namespace csem
