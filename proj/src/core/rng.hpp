#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace slfd {

// Deterministic random stream. All randomness in the library flows through
// this engine so that runs are reproducible bit-for-bit from a single root
// seed. Sub-streams are derived by name (see derive_seed) so stages cannot
// perturb each other's draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

    // splitmix64 step
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // standard normal, Box-Muller without cached spare (keeps streams simple)
    double normal() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 1e-300) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

// FNV-1a over a label, used to derive named sub-streams.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derive a child seed from a root seed and a stream label. Distinct labels
// give statistically independent streams under the same root.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
    Rng mix(root ^ fnv1a64(label));
    return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
    Rng mix(root ^ fnv1a64(label) ^ (0x632be59bd9b4e019ULL * (index + 1)));
    return mix.next_u64();
}

} // namespace slfd
