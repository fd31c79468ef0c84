#pragma once

#include <cstdint>

namespace collodiff {

// Counter-based RNG: each (seed, key...) tuple opens an independent stream,
// so per-pixel / per-sample streams do not depend on worker partitioning.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {}
    Rng(uint64_t seed, uint64_t k1) : state_(splitmix64(hash_combine(seed, k1))) {}
    Rng(uint64_t seed, uint64_t k1, uint64_t k2)
        : state_(splitmix64(hash_combine(hash_combine(seed, k1), k2))) {}
    Rng(uint64_t seed, uint64_t k1, uint64_t k2, uint64_t k3)
        : state_(splitmix64(hash_combine(hash_combine(hash_combine(seed, k1), k2), k3))) {}

    uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    // standard normal via Box-Muller
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    uint64_t state_;
};

}  // namespace collodiff
