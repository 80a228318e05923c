#include "isolab/distlab.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace isolab::dist {

namespace {

void check_n(int n) {
    if (n <= 0 || n > ExactDist::kMaxBits) throw ValidationError("distribution bit-length out of range");
}

}  // namespace

ExactDist ExactDist::uniform(int n) {
    check_n(n);
    uint64_t sz = uint64_t{1} << n;
    std::vector<Rat> p(sz, Rat(1, static_cast<unsigned long>(sz)));
    for (auto& q : p) q.canonicalize();
    return ExactDist(n, std::move(p));
}

ExactDist ExactDist::point_mass(int n, uint64_t atom) {
    check_n(n);
    uint64_t sz = uint64_t{1} << n;
    if (atom >= sz) throw ValidationError("point mass atom out of range");
    std::vector<Rat> p(sz, Rat(0));
    p[atom] = 1;
    return ExactDist(n, std::move(p));
}

ExactDist ExactDist::from_probs(int n, std::vector<Rat> probs) {
    check_n(n);
    if (probs.size() != (uint64_t{1} << n)) throw ValidationError("probability vector length mismatch");
    Rat sum(0);
    for (auto& q : probs) {
        q.canonicalize();
        if (sgn(q) < 0) throw ValidationError("negative probability");
        sum += q;
    }
    if (sum != 1) throw ValidationError("probabilities must sum to exactly 1");
    return ExactDist(n, std::move(probs));
}

ExactDist ExactDist::from_counts(int n, const std::vector<uint64_t>& counts, int shift) {
    check_n(n);
    if (counts.size() != (uint64_t{1} << n)) throw ValidationError("count vector length mismatch");
    std::vector<Rat> p(counts.size());
    unsigned long den = 1ul << shift;
    uint64_t total = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        total += counts[i];
        p[i] = Rat(static_cast<unsigned long>(counts[i]), den);
        p[i].canonicalize();
    }
    if (total != (uint64_t{1} << shift)) throw ValidationError("counts must sum to 2^shift");
    return ExactDist(n, std::move(p));
}

ExactDist ExactDist::unchecked(int n, std::vector<Rat> probs) {
    check_n(n);
    return ExactDist(n, std::move(probs));
}

Mixture::Mixture(std::vector<Rat> w, std::vector<ExactDist> p) : weights(std::move(w)), parts(std::move(p)) {
    if (weights.size() != parts.size() || parts.empty()) throw ValidationError("mixture weight/part mismatch");
    Rat sum(0);
    for (auto& q : weights) {
        if (sgn(q) < 0) throw ValidationError("negative mixture weight");
        sum += q;
    }
    if (sum != 1) throw ValidationError("mixture weights must sum to 1");
    for (const auto& part : parts)
        if (part.n() != parts.front().n()) throw ValidationError("mixture parts disagree on bit-length");
}

Rat tv_distance(const ExactDist& P, const ExactDist& Q) {
    if (P.n() != Q.n()) throw ValidationError("tv_distance length mismatch");
    Rat acc(0);
    Rat diff;
    for (uint64_t x = 0; x < P.size(); ++x) {
        diff = P.prob(x) - Q.prob(x);
        if (sgn(diff) < 0) diff = -diff;
        acc += diff;
    }
    acc /= 2;
    return acc;
}

Rat tv_distance_positive_part(const ExactDist& P, const ExactDist& Q) {
    if (P.n() != Q.n()) throw ValidationError("tv_distance length mismatch");
    Rat acc(0);
    Rat diff;
    for (uint64_t x = 0; x < P.size(); ++x) {
        diff = P.prob(x) - Q.prob(x);
        if (sgn(diff) > 0) acc += diff;
    }
    return acc;
}

MaxProbInfo min_entropy(const ExactDist& P) {
    Rat mx(0);
    for (uint64_t x = 0; x < P.size(); ++x)
        if (P.prob(x) > mx) mx = P.prob(x);
    auto bounds = neg_log2_bounds(mx);
    return MaxProbInfo{mx, bounds.floor_neg_log2, bounds.ceil_neg_log2};
}

bool has_min_entropy(const ExactDist& P, const KExp& k) {
    Threshold thr = pow2_neg(k);
    for (uint64_t x = 0; x < P.size(); ++x)
        if (P.prob(x) > thr.value) return false;
    return true;
}

LightSet light_set(const ExactDist& P, const KExp& k) {
    if (k.k < 0) throw ValidationError("light_set exponent must be nonnegative");
    LightSet L;
    L.k = k;
    L.threshold = pow2_neg(k);
    L.n = P.n();
    L.mask.assign((P.size() + 63) / 64, 0);
    for (uint64_t x = 0; x < P.size(); ++x) {
        if (P.prob(x) <= L.threshold.value) {
            L.mask[x >> 6] |= uint64_t{1} << (x & 63);
            ++L.count;
        }
    }
    return L;
}

SmoothingMap smooth(const ExactDist& P, int k) {
    if (k < 0) throw ValidationError("smooth exponent must be nonnegative");
    const Rat thr = pow2(-k);
    const uint64_t sz = P.size();

    // Union-find over strings; each root tracks (mass, min member index).
    std::vector<uint32_t> parent(sz);
    std::vector<Rat> mass(sz);
    for (uint64_t x = 0; x < sz; ++x) {
        parent[x] = static_cast<uint32_t>(x);
        mass[x] = P.prob(x);
    }
    auto find = [&](uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    // Ordered pool of live buckets keyed by (mass, min index). The two
    // globally smallest buckets are the only candidate pair: if they do not
    // fit under the threshold no other pair does.
    std::set<std::pair<Rat, uint32_t>> pool;
    for (uint64_t x = 0; x < sz; ++x) pool.insert({mass[x], static_cast<uint32_t>(x)});
    while (pool.size() >= 2) {
        auto it = pool.begin();
        auto [m1, i1] = *it;
        ++it;
        auto [m2, i2] = *it;
        Rat combined = m1 + m2;
        if (combined > thr) break;
        pool.erase(pool.begin());
        pool.erase(pool.begin());
        uint32_t keep = std::min(i1, i2);
        uint32_t drop = std::max(i1, i2);
        parent[drop] = keep;
        mass[keep] = combined;
        pool.insert({combined, keep});
    }

    SmoothingMap S;
    S.n = P.n();
    S.bucket_of.assign(sz, 0);
    // Renumber buckets in increasing order of their minimum member.
    std::vector<uint32_t> roots;
    roots.reserve(pool.size());
    for (auto& [m, idx] : pool) roots.push_back(idx);
    std::sort(roots.begin(), roots.end());
    std::vector<uint32_t> bucket_id(sz, 0);
    S.bucket_mass.resize(roots.size());
    for (size_t b = 0; b < roots.size(); ++b) {
        bucket_id[roots[b]] = static_cast<uint32_t>(b);
        S.bucket_mass[b] = mass[roots[b]];
    }
    for (uint64_t x = 0; x < sz; ++x) S.bucket_of[x] = bucket_id[find(static_cast<uint32_t>(x))];
    S.bucket_count = static_cast<uint32_t>(roots.size());
    return S;
}

ExactDist mixture_collapse(const Mixture& M) {
    const int n = M.parts.front().n();
    std::vector<Rat> p(uint64_t{1} << n, Rat(0));
    for (size_t i = 0; i < M.parts.size(); ++i) {
        if (sgn(M.weights[i]) == 0) continue;
        const auto& part = M.parts[i];
        for (uint64_t x = 0; x < part.size(); ++x)
            if (sgn(part.prob(x)) != 0) p[x] += M.weights[i] * part.prob(x);
    }
    return ExactDist::unchecked(n, std::move(p));
}

ExactDist product(const ExactDist& P, const ExactDist& Q) {
    int n = P.n() + Q.n();
    if (n > ExactDist::kMaxBits) throw ValidationError("product exceeds bit-length cap");
    std::vector<Rat> p(uint64_t{1} << n, Rat(0));
    for (uint64_t x = 0; x < P.size(); ++x) {
        if (sgn(P.prob(x)) == 0) continue;
        for (uint64_t y = 0; y < Q.size(); ++y) {
            if (sgn(Q.prob(y)) == 0) continue;
            p[x | (y << P.n())] = P.prob(x) * Q.prob(y);
        }
    }
    return ExactDist::unchecked(n, std::move(p));
}

}  // namespace isolab::dist
