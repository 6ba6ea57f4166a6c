#ifndef ORTHOVIEW_DETAIL_RNG_HPP
#define ORTHOVIEW_DETAIL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace orthoview::detail {

// All randomness in the library goes through these helpers instead of
// std::uniform_real_distribution / std::normal_distribution, whose output
// sequences are implementation-defined. Keeping the mapping from raw
// mt19937_64 draws explicit pins byte-identical outputs for a fixed seed.

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). Lemire reduction; slight modulo-free bias-free enough here.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(rng()) * static_cast<__uint128_t>(n)) >> 64);
}

/// Standard normal via Box-Muller. Consumes two draws per pair of calls.
class NormalSampler {
public:
    double operator()(std::mt19937_64& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01(rng);
        double u2 = uniform01(rng);
        while (u1 <= 0.0) u1 = uniform01(rng);
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Fisher-Yates with the pinned index mapping above.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

/// SplitMix64 step, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace orthoview::detail

#endif
