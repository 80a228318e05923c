#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isolab/isolators.hpp"

namespace isolab::hard {

using dist::ExactDist;
using iso::BoolFnTable;
using iso::IsolatorSpec;
using sources::ClassSpec;

// D = (U_1..U_t, Iso(U_1)..Iso(U_t)) over t(n+1) bits, blocks A_1..A_t first
// and the t indicator bits last. This matches the addr input layout.
struct HardDistSpec {
    BoolFnTable iso;
    int n = 0;
    int t = 0;
    ExactDist D;
};

HardDistSpec build_hard_dist(const BoolFnTable& iso_fn, int t);

// 1 - (1-alpha)^{t+1} - 2^{-(n-k)} (2t^3 + 1) - beta, exact; may be negative
// (vacuous). Requires 1 <= k <= n-1.
Rat theorem_bound(const Rat& alpha, const Rat& beta, int k, int n, int t);
// The t = 1 specialization printed alongside: 2a - a^2 - 2^{-(n-k-2)} - b.
Rat theorem_bound_t1_special(const Rat& alpha, const Rat& beta, int k, int n);
// Variant with exponent t on (1-alpha), as used in the derived instantiations.
Rat theorem_bound_proof_variant(const Rat& alpha, const Rat& beta, int k, int n, int t);

struct SourceTv {
    uint64_t index;
    Rat tv;
};

struct BoundReport {
    Rat rhs;
    Rat rhs_proof_variant;
    std::optional<Rat> rhs_t1_special;
    bool vacuous = false;           // rhs <= 0
    bool variants_disagree = false;  // rhs and proof variant differ in sign
    Rat min_tv;
    uint64_t argmin = 0;
    uint64_t checked = 0;
    uint64_t violations = 0;
    bool certified = false;  // min_tv >= rhs over the whole enumerated class
    std::vector<SourceTv> per_source;  // capped at per_source_cap
    bool per_source_truncated = false;
};

// Enumerates the class, measures exact TV(exact_output(X), D) per member and
// compares against the theorem bound. The isolator must be verified
// exhaustively for the addr-composed class of `cls` at the same t.
BoundReport certify_theorem(const IsolatorSpec& iso_spec, int t, const ClassSpec& cls, int jobs = 1,
                            uint64_t per_source_cap = uint64_t{1} << 21);

struct CountingSearchReport {
    std::string class_desc;
    int n = 0;
    uint64_t s = 0;
    uint64_t trials = 0;
    std::vector<uint64_t> best_support;
    Rat best_worst_tv;
    uint64_t best_trial = 0;
    std::vector<Rat> per_trial_worst_tv;
    // Counting-argument reference target 1 - (log2 |class| / 2^n)^{1/3},
    // constant-free; informational only.
    double claim_target = 0.0;
};

// Samples `trials` uniform supports of size s and reports the one whose
// uniform distribution is farthest (in worst-case exact TV) from the whole
// enumerated class.
CountingSearchReport counting_search(const ClassSpec& cls, int n, uint64_t s, uint64_t trials,
                                     uint64_t seed, int jobs = 1);

}  // namespace isolab::hard
