#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isolab/distlab.hpp"
#include "isolab/f2algebra.hpp"
#include "isolab/sources.hpp"

namespace isolab::iso {

using dist::ExactDist;
using dist::LightSet;
using dist::Mixture;
using f2::BitMatrix;
using f2::BitVec;
using f2::F2PolyMap;
using sources::ClassEnum;
using sources::ClassSpec;
using sources::SourceSpec;

struct BoolFnTable {
    int n = 0;
    std::vector<uint64_t> bits;  // packed, 2^n entries

    BoolFnTable() = default;
    BoolFnTable(int n_bits, std::vector<uint64_t> packed);
    static BoolFnTable from_values(int n_bits, const std::vector<uint8_t>& vals);
    static BoolFnTable constant(int n_bits, bool v);

    uint64_t size() const { return uint64_t{1} << n; }
    bool get(uint64_t x) const { return (bits[x >> 6] >> (x & 63)) & 1; }
    uint64_t ones() const;
};

struct MultiOutFnTable {
    int n = 0;
    int m = 0;
    std::vector<uint32_t> values;  // 2^n entries, each < 2^m

    MultiOutFnTable() = default;
    MultiOutFnTable(int n_bits, int m_bits, std::vector<uint32_t> vals);
    uint64_t size() const { return uint64_t{1} << n; }
    uint32_t get(uint64_t x) const { return values[x]; }
};

enum class Verified { Unverified, Exhaustive, Sampled };
std::string verified_name(Verified v);

struct Witness {
    uint64_t source_index = 0;
    Rat measured;  // Pr[X in L and Iso(X) = 1] for the violating source
    bool condition1_failed = false;
};

struct IsolatorSpec {
    BoolFnTable fn;
    Rat alpha;
    Rat beta;
    KExp k;
    ClassSpec cls;
    Verified verified = Verified::Unverified;
    bool degenerate = false;  // alpha > beta or alpha <= 0: admissible but flagged

    IsolatorSpec() = default;
    IsolatorSpec(BoolFnTable f, Rat a, Rat b, KExp kk, ClassSpec c);
};

struct VerifyResult {
    IsolatorSpec spec;
    bool ok = false;
    std::optional<Witness> witness;
    Rat uniform_accept;  // exact Pr[Iso(U^n) = 1]
    Rat max_light_mass;  // max over enumerated sources of Pr[X in L, Iso = 1]
    uint64_t checked = 0;
};

// Condition 1 exactly on U^n; condition 2 for every enumerated source via
// exact output distributions and light sets. When cls.addr_t > 0 each member
// is pushed through addr before measuring. Verified status is Exhaustive for
// exhaustive/affine-images streams and Sampled otherwise.
VerifyResult verify_isolator(const BoolFnTable& fn, const Rat& alpha, const Rat& beta,
                             const KExp& k, const ClassSpec& cls, int jobs = 1);

// Polynomial-evaluation hash family: member a = (a_0 .. a_{t-1}) over
// GF(2^n) maps x to the low m bits of sum a_i x^i. Family size 2^{tn};
// members are indexed by the coefficient word, a_i = bits [i*n, (i+1)*n).
struct HashFamily {
    int n = 0;
    int m = 0;
    int t = 1;

    HashFamily() = default;
    HashFamily(int n_bits, int m_bits, int t_wise);
    Int family_size() const;
    std::vector<uint32_t> coeffs(const Int& index) const;
    uint32_t eval(const std::vector<uint32_t>& coeffs, uint32_t x) const;
    MultiOutFnTable member_table(const Int& index) const;
};

struct SearchStats {
    uint64_t members_tried = 0;
    uint64_t condition1_failures = 0;
    uint64_t condition2_failures = 0;
};

struct SearchResult {
    bool found = false;
    Int member_index;
    std::optional<VerifyResult> verified;
    SearchStats stats;
};

// Walks the family in canonical coefficient order, builds g = 1(h(x) = 0^m)
// per member and runs verify_isolator; stops at the first verified member or
// when the member budget runs out.
SearchResult search_isolator(const HashFamily& family, const Rat& alpha, const Rat& beta,
                             const KExp& k, const ClassSpec& cls, uint64_t member_budget,
                             int jobs = 1);

struct InequalityReport {
    Rat lhs;
    Rat threshold;
    bool holds = false;
};

// Exact left side of the t-wise tail inequality used to budget hash-family
// searches, compared against 1/tail_constant (default 8; exposed because the
// cited tail bound's constant is pinned only up to the reference). Requires
// alpha < p < beta and even t >= 2.
InequalityReport lemma44_inequality(const Rat& N, const Rat& K, const Rat& p, int t, int ell,
                                    int d, int n, const Rat& alpha, const Rat& beta,
                                    unsigned long tail_constant = 8);

struct InputReduceResult {
    BitMatrix A;
    BitVec b;
    Rat achieved_tv;
    bool success = false;  // achieved_tv <= 2*epsilon
    uint64_t candidates_tried = 0;
    int ell = 0;
};

// Randomized search for (A, b) with TV(f(U^r), f(A U^ell + b)) <= 2 eps,
// ell = ceil(n + 3 log2(1/eps)). A is sampled uniformly among full-rank
// matrices by rejection. When r <= ell the identity embedding is returned
// with TV 0. eps must be a power of two in (0, 1/4).
InputReduceResult input_reduce(const F2PolyMap& f, int eps_log2, uint64_t budget, uint64_t seed);

// Parameter lift of a bounded-input isolator: an (alpha, beta, k-1) isolator
// for degree-d sources with at most 4(k+1) inputs is claimed as an
// (alpha, beta + 2^{-k}, k) isolator for the unbounded-input class. k must be
// a positive integer here.
IsolatorSpec lift_isolator(const IsolatorSpec& bounded, int k);

// Iso(x) = 1(rext(x) = z) with claimed parameters (2^{-m}-eps, 2^{-m}+delta, k).
IsolatorSpec iso_from_rext(const MultiOutFnTable& rext, BitVec z, const Rat& eps,
                           const Rat& delta, const KExp& k, const ClassSpec& cls);

struct MixtureBoundReport {
    Rat bound;     // 2^{-m} + eps + ell 2^{-k'} + 2 gamma
    Rat measured;  // Pr[X in L and Ext(X) = 0^m] on the collapsed mixture
    bool holds = false;
};

// Mixture route to an isolator bound: every part must be tagged constant or
// carry min-entropy >= k (tags are re-verified exactly). The bound is checked
// against the collapsed mixture at light threshold k'.
MixtureBoundReport mixture_isolator_bound(const MultiOutFnTable& ext, const Mixture& parts,
                                          const std::vector<bool>& constant_tags, const Rat& eps,
                                          const KExp& k, const KExp& k_prime, const Rat& gamma);

// Blockwise inner product over GF(2^m); inputs are padded with trailing
// zeros to a multiple of m.
uint64_t ip_hash(uint64_t x, uint64_t y, int n, int m);
MultiOutFnTable ip_hash_table(int n, int m);  // over pairs, input bits = 2n (x low, y high)

struct TwoSourceReport {
    Rat measured;
    Rat bound;
    bool holds = false;
};

// Two-source robustness check: measured Pr[(X,Y) in L and Ext(X,Y) = z]
// against 2^{-(k2-n-1)} + max(2^{-m} + eps, 2^{-(k1-k0)}).
// Requires k > k1 + k2 and k1 > k0.
TwoSourceReport two_source_robust_bound(const ExactDist& X, const ExactDist& Y,
                                        const MultiOutFnTable& ext, int k, int k0, int k1, int k2,
                                        const Rat& eps, uint64_t z);

// Mixture lift for communication-style classes: beta' = 2^{-(t_shift-ell)} + beta
// at light threshold k + t_shift. Flags the vacuous case beta' >= 1.
IsolatorSpec comm_isolator_bound(const IsolatorSpec& iso, int ell, const Rat& t_shift);

struct FlatCheckReport {
    bool ok = false;
    uint64_t checked = 0;
    uint64_t high_entropy_cases = 0;  // |S| >= 2^k branch
    uint64_t small_support_cases = 0;
    Rat max_measured;
    std::optional<uint64_t> violating_support;
};

// Robustness of an extractor over flat sources: for each support S either
// |S| >= 2^k (light set is everything, extractor bound applies) or the
// measured mass is exactly 0. Exhaustive over all nonempty supports when
// sample_count == 0 (n <= 5), else seeded sampling.
FlatCheckReport flat_robustness_check(const MultiOutFnTable& ext, int k, const Rat& eps,
                                      uint64_t min_support, uint64_t max_support,
                                      uint64_t sample_count, uint64_t seed);

// Largest TV(Ext(U_S), U^m) over flat sources with |S| >= 2^k; the measured
// extractor error used to instantiate flat-source claims. Exhaustive.
Rat flat_extractor_error(const MultiOutFnTable& ext, int k);

}  // namespace isolab::iso
