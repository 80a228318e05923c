#pragma once

#include <cstdint>
#include <vector>

#include "isolab/rational.hpp"

namespace isolab::dist {

// Exact probability vector over {0,1}^n. Entry i is the mass of the string
// encoded by i under the project bit convention (bit 0 = leftmost position).
class ExactDist {
  public:
    static constexpr int kMaxBits = 24;

    static ExactDist uniform(int n);
    static ExactDist point_mass(int n, uint64_t atom);
    // Validates: nonnegative entries summing to exactly 1.
    static ExactDist from_probs(int n, std::vector<Rat> probs);
    // counts[i] / 2^shift; the counts must sum to 2^shift.
    static ExactDist from_counts(int n, const std::vector<uint64_t>& counts, int shift);
    // Trusted constructor for internal ops that build valid vectors directly.
    static ExactDist unchecked(int n, std::vector<Rat> probs);

    int n() const { return n_; }
    uint64_t size() const { return uint64_t{1} << n_; }
    const Rat& prob(uint64_t x) const { return probs_[x]; }
    const std::vector<Rat>& probs() const { return probs_; }

    bool operator==(const ExactDist& o) const { return n_ == o.n_ && probs_ == o.probs_; }

  private:
    ExactDist(int n, std::vector<Rat> probs) : n_(n), probs_(std::move(probs)) {}
    int n_;
    std::vector<Rat> probs_;
};

struct LightSet {
    KExp k;
    Threshold threshold;
    std::vector<uint64_t> mask;  // bitmask over 2^n strings
    uint64_t count = 0;
    int n = 0;

    bool contains(uint64_t x) const { return (mask[x >> 6] >> (x & 63)) & 1; }
};

struct Mixture {
    std::vector<Rat> weights;
    std::vector<ExactDist> parts;

    Mixture() = default;
    Mixture(std::vector<Rat> w, std::vector<ExactDist> p);
    size_t size() const { return parts.size(); }
    bool operator==(const Mixture& o) const { return weights == o.weights && parts == o.parts; }
};

struct SmoothingMap {
    int n = 0;
    uint32_t bucket_count = 0;
    std::vector<uint32_t> bucket_of;  // size 2^n
    std::vector<Rat> bucket_mass;     // size bucket_count
};

// Half-L1 formulation: (1/2) sum |P(x) - Q(x)|.
Rat tv_distance(const ExactDist& P, const ExactDist& Q);
// Max-event formulation: sum of positive parts of P - Q. Kept as a separate
// code path so the two can be compared against each other.
Rat tv_distance_positive_part(const ExactDist& P, const ExactDist& Q);

struct MaxProbInfo {
    Rat max_prob;
    long floor_neg_log2 = 0;  // largest integer k with max_prob <= 2^{-k}
    long ceil_neg_log2 = 0;   // smallest integer k with 2^{-k} <= max_prob
};
MaxProbInfo min_entropy(const ExactDist& P);
// max_x P(x) <= 2^{-k}, with the threshold semantics of pow2_neg.
bool has_min_entropy(const ExactDist& P, const KExp& k);

// L = {x : P(x) <= 2^{-k}}, non-strict.
LightSet light_set(const ExactDist& P, const KExp& k);

// Greedy bucket merge: repeatedly merge the two buckets of smallest mass
// while their combined mass stays <= 2^{-k}; ties broken by the smallest
// minimum member index. Deterministic given (P, k).
SmoothingMap smooth(const ExactDist& P, int k);

ExactDist mixture_collapse(const Mixture& M);

// Independent product; index order is concatenation order (P's coordinates
// first).
ExactDist product(const ExactDist& P, const ExactDist& Q);

}  // namespace isolab::dist
