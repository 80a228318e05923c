#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace isolab {

using Rat = mpq_class;
using Int = mpz_class;

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 2^e as an exact rational, e may be negative.
Rat pow2(long e);

// Exponent of a 2^{-k} threshold. k is a nonnegative rational; integral k
// gives exact thresholds, non-integral k is carried as a dyadic rational
// rounded down at 64 fractional bits and flagged approximate.
struct KExp {
    Rat k;

    KExp() : k(0) {}
    explicit KExp(long v) : k(v) {}
    explicit KExp(Rat v) : k(std::move(v)) {}

    bool integral() const { return k.get_den() == 1; }
};

struct Threshold {
    Rat value;
    bool approx = false;  // true when the dyadic rounding was applied
};

// 2^{-k} for k >= 0. Exact when k is integral; otherwise rounded down to a
// multiple of 2^{-64} (so the light set can only shrink).
Threshold pow2_neg(const KExp& k);
// Same, rounded up; used in bound formulas so a dyadic approximation can
// only weaken the claimed bound, never overstate it.
Threshold pow2_neg_up(const KExp& k);

// Exact predicate p <= 2^{-a/b} for p >= 0, via p^b * 2^a <= 1 in integers.
// Used as an independent route in tests; production thresholds go through
// pow2_neg.
bool leq_pow2_neg_exact(const Rat& p, const KExp& k);

// Bounds floor/ceil of -log2(p) for 0 < p <= 1.
struct Log2Bounds {
    long floor_neg_log2;
    long ceil_neg_log2;
};
Log2Bounds neg_log2_bounds(const Rat& p);

// Canonical "num/den" (or "num" when integral) in lowest terms.
std::string rat_to_string(const Rat& r);
Rat rat_from_string(const std::string& s);

}  // namespace isolab
