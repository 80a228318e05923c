#include "isolab/hardness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "isolab/parallel.hpp"

namespace isolab::hard {

HardDistSpec build_hard_dist(const BoolFnTable& iso_fn, int t) {
    const int n = iso_fn.n;
    if (t < 1) throw ValidationError("t must be positive");
    const int total = t * (n + 1);
    if (total > ExactDist::kMaxBits) throw ValidationError("hard distribution exceeds bit-length cap");

    std::vector<Rat> probs(uint64_t{1} << total, Rat(0));
    Rat mass = pow2(-(t * n));
    const uint64_t block_mask = (uint64_t{1} << n) - 1;
    for (uint64_t w = 0; w < (uint64_t{1} << (t * n)); ++w) {
        uint64_t idx = 0;
        for (int i = 0; i < t; ++i) {
            uint64_t xi = (w >> (i * n)) & block_mask;
            idx |= xi << (i * n);
            if (iso_fn.get(xi)) idx |= uint64_t{1} << (t * n + i);
        }
        probs[idx] += mass;
    }
    return HardDistSpec{iso_fn, n, t, ExactDist::unchecked(total, std::move(probs))};
}

namespace {

void check_bound_params(const Rat& alpha, const Rat& beta, int k, int n) {
    if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1) throw ValidationError("alpha, beta must lie in [0,1]");
    if (k < 1 || k > n - 1) throw ValidationError("hypothesis violated: need 1 <= k <= n-1");
}

Rat pow_rat_ui(const Rat& base, unsigned long e) {
    Int num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), e);
    Rat r(num, den);
    r.canonicalize();
    return r;
}

}  // namespace

Rat theorem_bound(const Rat& alpha, const Rat& beta, int k, int n, int t) {
    check_bound_params(alpha, beta, k, n);
    if (t < 1) throw ValidationError("t must be positive");
    Rat one_minus(1);
    one_minus -= alpha;
    Rat poly(static_cast<long>(2) * t * t * t + 1);
    return Rat(1) - pow_rat_ui(one_minus, static_cast<unsigned long>(t) + 1) - pow2(-(n - k)) * poly - beta;
}

Rat theorem_bound_t1_special(const Rat& alpha, const Rat& beta, int k, int n) {
    check_bound_params(alpha, beta, k, n);
    return 2 * alpha - alpha * alpha - pow2(-(n - k - 2)) - beta;
}

Rat theorem_bound_proof_variant(const Rat& alpha, const Rat& beta, int k, int n, int t) {
    check_bound_params(alpha, beta, k, n);
    if (t < 1) throw ValidationError("t must be positive");
    Rat one_minus(1);
    one_minus -= alpha;
    Rat poly(static_cast<long>(2) * t * t * t + 1);
    return Rat(1) - pow_rat_ui(one_minus, static_cast<unsigned long>(t)) - pow2(-(n - k)) * poly - beta;
}

BoundReport certify_theorem(const IsolatorSpec& iso_spec, int t, const ClassSpec& cls, int jobs,
                            uint64_t per_source_cap) {
    if (iso_spec.verified != iso::Verified::Exhaustive)
        throw ValidationError("certification requires an exhaustively verified isolator");
    if (iso_spec.cls.addr_t != t)
        throw ValidationError("isolator was not verified for the addr-composed class at this t");
    if (!iso_spec.k.integral()) throw ValidationError("certification requires integral k");
    const int n = iso_spec.fn.n;
    if (cls.n_out != t * (n + 1)) throw ValidationError("class output bits must equal t(n+1)");
    {
        ClassSpec base = iso_spec.cls;
        base.addr_t = 0;
        if (!base.same_class(cls))
            throw ValidationError("isolator class does not match the certified class");
    }

    const long k = mpz_get_si(iso_spec.k.k.get_num().get_mpz_t());
    BoundReport rep;
    rep.rhs = theorem_bound(iso_spec.alpha, iso_spec.beta, static_cast<int>(k), n, t);
    rep.rhs_proof_variant = theorem_bound_proof_variant(iso_spec.alpha, iso_spec.beta, static_cast<int>(k), n, t);
    if (t == 1)
        rep.rhs_t1_special = theorem_bound_t1_special(iso_spec.alpha, iso_spec.beta, static_cast<int>(k), n);
    rep.vacuous = sgn(rep.rhs) <= 0;
    rep.variants_disagree = (sgn(rep.rhs) <= 0) != (sgn(rep.rhs_proof_variant) <= 0);

    sources::ClassEnum en(cls);
    const ExactDist D = build_hard_dist(iso_spec.fn, t).D;
    const uint64_t total = en.size();
    const uint64_t block = 4096;

    struct BlockOut {
        Rat min_tv;
        uint64_t argmin = 0;
        uint64_t violations = 0;
        uint64_t checked = 0;
        std::vector<SourceTv> tvs;
    };
    bool keep_all = total <= per_source_cap;
    auto results = parallel_blocks<BlockOut>(total, block, jobs, [&](uint64_t lo, uint64_t hi) {
        BlockOut out;
        out.min_tv = 2;
        if (keep_all) out.tvs.reserve(hi - lo);
        for (uint64_t i = lo; i < hi; ++i) {
            ExactDist d = en.dist_at(i);
            Rat tv = dist::tv_distance(d, D);
            if (tv < out.min_tv) {
                out.min_tv = tv;
                out.argmin = i;
            }
            if (tv < rep.rhs) ++out.violations;
            ++out.checked;
            if (keep_all) out.tvs.push_back(SourceTv{i, std::move(tv)});
        }
        return out;
    });

    rep.min_tv = 2;
    for (auto& b : results) {
        rep.checked += b.checked;
        rep.violations += b.violations;
        if (b.checked > 0 && b.min_tv < rep.min_tv) {
            rep.min_tv = b.min_tv;
            rep.argmin = b.argmin;
        }
        if (keep_all)
            for (auto& tv : b.tvs) rep.per_source.push_back(std::move(tv));
    }
    rep.per_source_truncated = !keep_all;
    rep.certified = rep.violations == 0;
    return rep;
}

CountingSearchReport counting_search(const ClassSpec& cls, int n, uint64_t s, uint64_t trials,
                                     uint64_t seed, int jobs) {
    if (n < 1 || n > 12) throw ValidationError("counting search capped at n <= 12");
    if (cls.n_out != n) throw ValidationError("class output bits must match n");
    const uint64_t N = uint64_t{1} << n;
    if (s < 1 || s > N) throw ValidationError("support size out of range");
    if (trials < 1) throw ValidationError("need at least one trial");

    sources::ClassEnum en(cls);
    const uint64_t total = en.size();
    const uint64_t mask_words = (N + 63) / 64;

    CountingSearchReport rep;
    rep.class_desc = cls.describe();
    rep.n = n;
    rep.s = s;
    rep.trials = trials;
    rep.per_trial_worst_tv.resize(trials);
    {
        double log_m = static_cast<double>(mpz_sizeinbase(en.total_count().get_mpz_t(), 2));
        rep.claim_target = 1.0 - std::cbrt(log_m / static_cast<double>(N));
    }

    for (uint64_t trial = 0; trial < trials; ++trial) {
        Rng rng = Rng(seed).fork(trial);
        auto pts = rng.distinct(s, N);
        std::vector<uint64_t> smask(mask_words, 0);
        for (uint64_t p : pts) smask[p >> 6] |= uint64_t{1} << (p & 63);

        Rat worst;
        if (en.has_affine_fast_path()) {
            // TV(U_S, U_W) = 1 - |S cap W| / max(s, |W|); minimize over the
            // class by maximizing the overlap fraction, in integers.
            const uint64_t block = 1 << 15;
            struct Best {
                uint64_t num = 0;
                uint64_t den = 1;
            };
            auto blocks = parallel_blocks<Best>(total, block, jobs, [&](uint64_t lo, uint64_t hi) {
                Best best;
                std::vector<uint64_t> wmask;
                int dim = 0;
                for (uint64_t i = lo; i < hi; ++i) {
                    en.support_at(i, wmask, dim);
                    uint64_t ov = 0;
                    for (uint64_t w = 0; w < mask_words; ++w)
                        ov += static_cast<uint64_t>(std::popcount(wmask[w] & smask[w]));
                    uint64_t den = std::max(s, uint64_t{1} << dim);
                    if (static_cast<unsigned __int128>(ov) * best.den >
                        static_cast<unsigned __int128>(best.num) * den) {
                        best.num = ov;
                        best.den = den;
                    }
                }
                return best;
            });
            uint64_t bn = 0, bd = 1;
            for (const auto& b : blocks)
                if (static_cast<unsigned __int128>(b.num) * bd > static_cast<unsigned __int128>(bn) * b.den) {
                    bn = b.num;
                    bd = b.den;
                }
            Rat frac(static_cast<unsigned long>(bn), static_cast<unsigned long>(bd));
            frac.canonicalize();
            worst = Rat(1) - frac;
        } else {
            std::vector<Rat> sp(N, Rat(0));
            Rat u(1, static_cast<unsigned long>(s));
            u.canonicalize();
            for (uint64_t p : pts) sp[p] = u;
            ExactDist us = ExactDist::unchecked(n, std::move(sp));
            worst = 2;
            for (uint64_t i = 0; i < total; ++i) {
                Rat tv = dist::tv_distance(us, en.dist_at(i));
                if (tv < worst) worst = tv;
            }
        }
        rep.per_trial_worst_tv[trial] = worst;
        if (trial == 0 || worst > rep.best_worst_tv) {
            rep.best_worst_tv = worst;
            rep.best_trial = trial;
            rep.best_support = pts;
        }
    }
    return rep;
}

}  // namespace isolab::hard
