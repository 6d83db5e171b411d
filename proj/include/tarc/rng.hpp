#ifndef TARC_RNG_HPP_
#define TARC_RNG_HPP_

#include <cstdint>
#include <random>

#include "tarc/common.hpp"

namespace tarc {

// splitmix64 finalizer, used to derive independent seeds from a base seed
// and stream identifiers. Stable across platforms.
inline uint64_t mix_bits(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return mix_bits(mix_bits(base ^ (a * 0xd6e8feb86659fd93ULL)) ^ b);
}

// Deterministic RNG: mt19937_64 engine (bit-stable by the standard) with
// hand-rolled distribution transforms, so sampled streams are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (hi - lo + 1));
    }

    // standard normal via Box-Muller; consumes two uniforms per draw
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // index into probs by CDF inversion; probs assumed to sum to ~1
    int categorical(const Vec& probs) {
        double u = uniform();
        double cum = 0.0;
        for (size_t k = 0; k + 1 < probs.size(); ++k) {
            cum += probs[k];
            if (u < cum) return static_cast<int>(k);
        }
        return static_cast<int>(probs.size()) - 1;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace tarc

#endif  // TARC_RNG_HPP_
