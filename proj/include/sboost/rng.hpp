#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace sboost {

/// Engine used for sequential streams (one per chain or simulation).
using Rng = std::mt19937_64;

/// Counter-based generator: the stream is a pure function of its key, so
/// per-index draws are reproducible regardless of how work is scheduled.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t key) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

/// Mixes any number of 64-bit words into one well-distributed key.
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b, std::uint64_t c);

/// Named substream seed, e.g. derive_seed(root, "gibbs.chain0").
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

/// Uniform on the open interval (0,1).
template <class Engine>
double uniform_open(Engine& eng) {
    for (;;) {
        const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        if (u > 0.0) return u;
    }
}

} // namespace sboost
