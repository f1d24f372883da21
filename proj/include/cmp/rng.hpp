#pragma once

#include <cmath>
#include <cstdint>

namespace cmp {

// splitmix64, used both as the seed-derivation function and to expand a
// master seed into independent stream seeds. The derivation is fixed so
// that a (master seed, stream index) pair maps to the same stream in any
// reimplementation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream indices used by the training loop. Streams derived from the same
// master seed are mutually independent by construction.
enum class Stream : uint64_t {
    init = 0,         // network initialization
    exploration = 1,  // exploration rollouts and action noise
    evaluation = 2,   // evaluation rollouts
    update = 3,       // replay batch sampling
};

inline uint64_t derive_stream_seed(uint64_t master_seed, Stream stream) {
    uint64_t s = master_seed;
    uint64_t derived = 0;
    for (uint64_t i = 0; i <= static_cast<uint64_t>(stream); ++i) {
        derived = splitmix64(s);
    }
    return derived;
}

// xoshiro256++ with hand-rolled uniform/normal transforms. std::*_distribution
// is implementation-defined, so none of it is used anywhere in this codebase;
// identical seeds must give identical trajectories on any platform.
class Rng {
  public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) {
            word = splitmix64(sm);
        }
        has_cached_normal_ = false;
        cached_normal_ = 0.0;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int n) {  // [0, n)
        return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
    }

    // standard normal via Box-Muller; second value cached
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        // u1 in (0, 1] so log() is finite
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        cached_normal_ = radius * std::sin(angle);
        has_cached_normal_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4] = {};
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace cmp
