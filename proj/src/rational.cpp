#include "isolab/rational.hpp"

namespace isolab {

Rat pow2(long e) {
    Int num = 1, den = 1;
    if (e >= 0)
        mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    else
        mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    Rat r(num, den);
    r.canonicalize();
    return r;
}

Threshold pow2_neg(const KExp& k) {
    if (k.k < 0) throw ValidationError("threshold exponent must be nonnegative");
    if (k.integral()) {
        long e = static_cast<long>(mpz_get_si(k.k.get_num().get_mpz_t()));
        return Threshold{pow2(-e), false};
    }
    // floor(2^{64 - p/q} ) / 2^64 with p/q = k: compute floor of the q-th
    // root of 2^{64q - p}, rounding the threshold down.
    Int p = k.k.get_num();
    Int q = k.k.get_den();
    Int e = 64 * q - p;
    Int mantissa = 0;
    if (e >= 0) {
        Int base = 1;
        mpz_mul_2exp(base.get_mpz_t(), base.get_mpz_t(), mpz_get_ui(e.get_mpz_t()));
        mpz_root(mantissa.get_mpz_t(), base.get_mpz_t(), mpz_get_ui(q.get_mpz_t()));
    }
    Int den = 1;
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), 64);
    Rat r(mantissa, den);
    r.canonicalize();
    return Threshold{r, true};
}

Threshold pow2_neg_up(const KExp& k) {
    Threshold down = pow2_neg(k);
    if (!down.approx) return down;
    // The root is never exact for non-integral k, so floor + ulp = ceil.
    down.value += pow2(-64);
    return down;
}

bool leq_pow2_neg_exact(const Rat& p, const KExp& k) {
    if (sgn(p) < 0) return true;
    Int a = k.k.get_num();
    Int b = k.k.get_den();
    // p <= 2^{-a/b}  <=>  num^b * 2^a <= den^b   (p >= 0, b >= 1)
    Int lhs, rhs;
    mpz_pow_ui(lhs.get_mpz_t(), p.get_num().get_mpz_t(), mpz_get_ui(b.get_mpz_t()));
    if (a >= 0) {
        mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), mpz_get_ui(a.get_mpz_t()));
        mpz_pow_ui(rhs.get_mpz_t(), p.get_den().get_mpz_t(), mpz_get_ui(b.get_mpz_t()));
    } else {
        Int na = -a;
        mpz_pow_ui(rhs.get_mpz_t(), p.get_den().get_mpz_t(), mpz_get_ui(b.get_mpz_t()));
        mpz_mul_2exp(rhs.get_mpz_t(), rhs.get_mpz_t(), mpz_get_ui(na.get_mpz_t()));
    }
    return lhs <= rhs;
}

Log2Bounds neg_log2_bounds(const Rat& p) {
    if (sgn(p) <= 0 || p > 1) throw ValidationError("neg_log2_bounds needs 0 < p <= 1");
    // Largest k with p <= 2^{-k}, i.e. num * 2^k <= den.
    long k = static_cast<long>(mpz_sizeinbase(p.get_den().get_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(p.get_num().get_mpz_t(), 2));
    auto le = [&](long e) {
        Int lhs = p.get_num();
        mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(e < 0 ? 0 : e));
        return lhs <= p.get_den();
    };
    while (k > 0 && !le(k)) --k;
    while (le(k + 1)) ++k;
    if (k < 0) k = 0;
    long floor_h = k;  // p <= 2^{-floor_h}, floor of -log2(p)
    // ceil: smallest k with 2^{-k} <= p
    long c = floor_h;
    {
        Int lhs = p.get_num();
        mpz_mul_2exp(lhs.get_mpz_t(), lhs.get_mpz_t(), static_cast<mp_bitcnt_t>(floor_h));
        if (lhs != p.get_den()) c = floor_h + 1;
    }
    return Log2Bounds{floor_h, c};
}

std::string rat_to_string(const Rat& r) {
    Rat c = r;
    c.canonicalize();
    return c.get_str();
}

Rat rat_from_string(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw ValidationError("malformed rational: " + s);
    if (r.get_den() == 0) throw ValidationError("zero denominator: " + s);
    r.canonicalize();
    return r;
}

}  // namespace isolab
