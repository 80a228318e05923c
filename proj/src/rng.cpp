#include "isolab/rng.hpp"

#include <algorithm>

namespace isolab {

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

uint64_t Rng::u64() {
    uint64_t result = rotl(s_[1] * 5, 7) * 9;
    uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

uint64_t Rng::below(uint64_t bound) {
    // Rejection from the largest multiple of bound.
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        uint64_t r = u64();
        if (r >= threshold) return r % bound;
    }
}

uint64_t Rng::bits(int nbits) {
    if (nbits <= 0) return 0;
    uint64_t r = u64();
    if (nbits >= 64) return r;
    return r >> (64 - nbits);
}

mpz_class Rng::mpz_below(const mpz_class& bound) {
    size_t nbits = mpz_sizeinbase(bound.get_mpz_t(), 2);
    for (;;) {
        mpz_class v = 0;
        for (size_t got = 0; got < nbits; got += 64) {
            mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 64);
            v += mpz_class(static_cast<unsigned long>(u64()));
        }
        mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), nbits);
        if (v < bound) return v;
    }
}

std::vector<uint64_t> Rng::distinct(uint64_t count, uint64_t universe) {
    std::vector<uint64_t> out;
    out.reserve(count);
    // Floyd's algorithm: uniform distinct sample without replacement.
    for (uint64_t j = universe - count; j < universe; ++j) {
        uint64_t t = below(j + 1);
        bool seen = false;
        for (uint64_t v : out)
            if (v == t) {
                seen = true;
                break;
            }
        out.push_back(seen ? j : t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Rng Rng::fork(uint64_t stream) const {
    uint64_t x = s_[0] ^ (stream * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull);
    return Rng(x);
}

}  // namespace isolab
