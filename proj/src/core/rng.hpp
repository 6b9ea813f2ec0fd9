#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <vector>

namespace dfl {

// Deterministic random stream (xoshiro256**, splitmix64-seeded).
//
// The standard <random> distributions are implementation-defined, so every
// draw here is hand-rolled: results are reproducible across compilers and
// standard libraries for a fixed seed. Simulation code never shares one
// stream between nodes; it derives an independent stream per logical task
// (see derive_stream) so results cannot depend on execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % bound;
    }

    // Integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Real in [0, 1) with 53 bits of precision.
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform_real();
        while (u1 <= 0.0) u1 = uniform_real();
        const double u2 = uniform_real();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + stddev * r * std::cos(theta);
    }

    // Fisher-Yates with our own bounded draw.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Mixes a master seed with a tag path ("node 3, round 17, epoch 2") into an
// independent stream. Streams keyed this way make per-node work order-free:
// serial and parallel execution draw identical randomness.
inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t acc = seed;
    Rng::splitmix64(acc);
    for (std::uint64_t tag : path) {
        acc ^= tag + 0x9E3779B97F4A7C15ULL + (acc << 6) + (acc >> 2);
        Rng::splitmix64(acc);
    }
    return acc;
}

inline Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(mix_seed(seed, path));
}

} // namespace dfl
