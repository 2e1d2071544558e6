#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pdrls {

/// Finalizer from the splitmix64 generator; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random stream.  Thin wrapper over std::mt19937_64 with the
/// handful of draw kinds the simulator needs.  Every stream is derived from
/// (master seed, tag path) so that creating streams in a different order, or
/// skipping some, never changes what another stream produces.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double gaussian() { return normal_(gen_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    /// Uniform integer in [0, n).  Pre: n >= 1.
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }

    std::uint64_t next_word() { return gen_(); }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream tags.  Values are part of the reproducibility contract: changing
/// them changes every seeded output.
enum class StreamTag : std::uint64_t {
    topology = 1,
    ground_truth = 2,
    node_profile = 3,
    link_profile = 4,
    regressor = 5,
    measurement = 6,
    selection = 7,
    link_noise = 8,
};

/// Derives an independent substream from a master seed and a tag path.
/// Mixing is a chained splitmix64 pass, one round per path element.
inline Rng derive_stream(std::uint64_t master_seed,
                         std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(master_seed);
    for (std::uint64_t word : path) {
        s = splitmix64(s ^ splitmix64(word + 0x632be59bd9b4e019ull));
    }
    return Rng(s);
}

inline Rng derive_stream(std::uint64_t master_seed, StreamTag tag,
                         std::uint64_t a = 0, std::uint64_t b = 0) {
    return derive_stream(master_seed,
                         {static_cast<std::uint64_t>(tag), a, b});
}

} // namespace pdrls
