#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace isolab {

// Deterministic xoshiro256** generator. We avoid <random> distributions
// because their output is implementation-defined; every draw here is exact
// and identical across platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed);

    uint64_t u64();

    // Uniform in [0, bound), bound > 0. Unbiased via rejection.
    uint64_t below(uint64_t bound);

    // Uniform nbits-bit word, 0 <= nbits <= 64.
    uint64_t bits(int nbits);

    bool coin() { return bits(1) != 0; }

    // Uniform in [0, bound) for big bounds, bound > 0.
    mpz_class mpz_below(const mpz_class& bound);

    // count distinct values from [0, universe), sorted ascending.
    std::vector<uint64_t> distinct(uint64_t count, uint64_t universe);

    // Independent generator for a named substream.
    Rng fork(uint64_t stream) const;

  private:
    uint64_t s_[4];
};

}  // namespace isolab
