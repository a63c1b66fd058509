#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness helpers. Everything here is seeded explicitly and
// avoids std::normal_distribution / std::shuffle, whose output sequences are
// implementation-defined; the generator family (mt19937_64), the splitmix64
// seed expansion and the Marsaglia polar transform are fixed so that the same
// seed reproduces the same bytes on every run.

namespace adaprune::rng {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Substream seed for (seed, domain, stream). Used to give every cluster of
// every generated domain its own generator, so sample layout is stable under
// changes elsewhere.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t domain,
                                    std::uint64_t stream) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (0x9E3779B97F4A7C15ull * (domain + 1)));
    h = mix64(h ^ (0xC2B2AE3D27D4EB4Full * (stream + 1)));
    return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % n;
}

// Standard normal draws via the Marsaglia polar method.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01(gen_) - 1.0;
            v = 2.0 * uniform01(gen_) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// In-place Fisher-Yates shuffle.
template <typename T>
void fisher_yates(std::vector<T>& items, std::mt19937_64& gen) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(bounded(gen, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace adaprune::rng
