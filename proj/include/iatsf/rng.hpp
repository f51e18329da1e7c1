#pragma once

#include <cmath>
#include <cstdint>

namespace iatsf {

/// Deterministic, splittable PRNG built on the SplitMix64 mixing function
/// (Steele, Lea & Flood 2014). Every stochastic component in this codebase
/// takes an Rng (or a seed + stream id) explicitly, so runs are reproducible
/// bit-for-bit across platforms: the generator uses only integer arithmetic
/// and IEEE-754 double conversion.
///
/// split(stream) derives an independent generator from the *initial* seed and
/// a stream id; child streams do not depend on how much the parent has been
/// consumed.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), state_(seed) {}

    uint64_t next_u64() {
        // SplitMix64 step.
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) using the top 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller; the second deviate of each pair is
    /// cached, so draws come in deterministic order.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Independent child stream keyed by (initial seed, stream id).
    Rng split(uint64_t stream) const {
        uint64_t z = seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

    uint64_t seed() const { return seed_; }

    // State capture for exact training resumption.
    struct State {
        uint64_t seed;
        uint64_t state;
        double cached;
        bool has_cached;
    };
    State save() const { return {seed_, state_, cached_, has_cached_}; }
    void restore(const State& s) {
        seed_ = s.seed;
        state_ = s.state;
        cached_ = s.cached;
        has_cached_ = s.has_cached;
    }

private:
    uint64_t seed_;
    uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Stable 64-bit FNV-1a hash with a seed, used for text hashing. Platform
/// independent by construction.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace iatsf
