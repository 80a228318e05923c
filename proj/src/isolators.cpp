#include "isolab/isolators.hpp"

#include <algorithm>
#include <atomic>
#include <bit>

#include "isolab/parallel.hpp"

namespace isolab::iso {

using dist::light_set;

BoolFnTable::BoolFnTable(int n_bits, std::vector<uint64_t> packed) : n(n_bits), bits(std::move(packed)) {
    if (n < 1 || n > 24) throw ValidationError("function table bit-length out of range");
    if (bits.size() != ((uint64_t{1} << n) + 63) / 64) throw ValidationError("function table word count mismatch");
    if (n < 6) bits[0] &= (uint64_t{1} << (uint64_t{1} << n)) - 1;
}

BoolFnTable BoolFnTable::from_values(int n_bits, const std::vector<uint8_t>& vals) {
    if (vals.size() != (uint64_t{1} << n_bits)) throw ValidationError("function table length mismatch");
    std::vector<uint64_t> packed((vals.size() + 63) / 64, 0);
    for (size_t i = 0; i < vals.size(); ++i)
        if (vals[i]) packed[i >> 6] |= uint64_t{1} << (i & 63);
    return BoolFnTable(n_bits, std::move(packed));
}

BoolFnTable BoolFnTable::constant(int n_bits, bool v) {
    std::vector<uint64_t> packed(((uint64_t{1} << n_bits) + 63) / 64, v ? ~uint64_t{0} : 0);
    return BoolFnTable(n_bits, std::move(packed));
}

uint64_t BoolFnTable::ones() const {
    uint64_t c = 0;
    uint64_t total = size();
    for (size_t i = 0; i < bits.size(); ++i) {
        uint64_t w = bits[i];
        if ((i + 1) * 64 > total) w &= (uint64_t{1} << (total - i * 64)) - 1;
        c += static_cast<uint64_t>(std::popcount(w));
    }
    return c;
}

MultiOutFnTable::MultiOutFnTable(int n_bits, int m_bits, std::vector<uint32_t> vals)
    : n(n_bits), m(m_bits), values(std::move(vals)) {
    if (n < 1 || n > 24) throw ValidationError("table input bits out of range");
    if (m < 1 || m > n) throw ValidationError("table output bits out of range");
    if (values.size() != (uint64_t{1} << n)) throw ValidationError("table length mismatch");
    for (uint32_t v : values)
        if (v >> m) throw ValidationError("table value exceeds output width");
}

std::string verified_name(Verified v) {
    switch (v) {
        case Verified::Unverified: return "unverified";
        case Verified::Exhaustive: return "verified-exhaustive";
        default: return "verified-sampled";
    }
}

IsolatorSpec::IsolatorSpec(BoolFnTable f, Rat a, Rat b, KExp kk, ClassSpec c)
    : fn(std::move(f)), alpha(std::move(a)), beta(std::move(b)), k(std::move(kk)), cls(std::move(c)) {
    if (alpha < 0 || alpha > 1) throw ValidationError("alpha out of [0,1]");
    degenerate = alpha <= beta;  // admissible claim, but too weak to be useful
}

namespace {

int effective_bits(const ClassSpec& cls) {
    if (cls.addr_t <= 0) return cls.n_out;
    if (cls.n_out % cls.addr_t != 0 || cls.n_out / cls.addr_t < 2)
        throw ValidationError("class output bits incompatible with addr composition");
    return cls.n_out / cls.addr_t - 1;
}

Rat light_one_mass(const ExactDist& d, const LightSet& L, const BoolFnTable& fn) {
    Rat mass(0);
    for (uint64_t x = 0; x < d.size(); ++x)
        if (fn.get(x) && L.contains(x) && sgn(d.prob(x)) != 0) mass += d.prob(x);
    return mass;
}

}  // namespace

VerifyResult verify_isolator(const BoolFnTable& fn, const Rat& alpha, const Rat& beta,
                             const KExp& k, const ClassSpec& cls, int jobs) {
    const int eff_n = effective_bits(cls);
    if (fn.n != eff_n) throw ValidationError("isolator table size does not match class output bits");

    VerifyResult res;
    res.spec = IsolatorSpec(fn, alpha, beta, k, cls);
    res.uniform_accept = Rat(static_cast<unsigned long>(fn.ones()), static_cast<unsigned long>(fn.size()));
    res.uniform_accept.canonicalize();
    res.max_light_mass = 0;

    if (res.uniform_accept < alpha) {
        res.ok = false;
        Witness w;
        w.condition1_failed = true;
        w.measured = res.uniform_accept;
        res.witness = w;
        return res;
    }

    ClassEnum en(cls);
    const uint64_t total = en.size();
    const uint64_t block = 4096;
    std::atomic<uint64_t> first_bad{UINT64_MAX};

    struct BlockOut {
        Rat max_mass;
        uint64_t checked = 0;
    };
    auto results = parallel_blocks<BlockOut>(total, block, jobs, [&](uint64_t lo, uint64_t hi) {
        BlockOut out;
        out.max_mass = 0;
        uint64_t blk_idx = lo / block;
        if (blk_idx > first_bad.load(std::memory_order_relaxed)) return out;
        for (uint64_t i = lo; i < hi; ++i) {
            ExactDist d = en.dist_at(i);
            if (cls.addr_t > 0) d = sources::addr_of_dist(d, eff_n, cls.addr_t);
            LightSet L = light_set(d, k);
            Rat mass = light_one_mass(d, L, fn);
            ++out.checked;
            if (mass > out.max_mass) out.max_mass = mass;
            if (mass > beta) {
                uint64_t cur = first_bad.load(std::memory_order_relaxed);
                while (blk_idx < cur && !first_bad.compare_exchange_weak(cur, blk_idx)) {
                }
                return out;
            }
        }
        return out;
    });

    for (const auto& b : results) {
        res.checked += b.checked;
        if (b.max_mass > res.max_light_mass) res.max_light_mass = b.max_mass;
    }

    uint64_t bad_block = first_bad.load();
    if (bad_block != UINT64_MAX) {
        // Rescan the earliest violating block for its first member, so the
        // witness is canonical regardless of worker interleaving.
        uint64_t lo = bad_block * block;
        uint64_t hi = std::min(total, lo + block);
        for (uint64_t i = lo; i < hi; ++i) {
            ExactDist d = en.dist_at(i);
            if (cls.addr_t > 0) d = sources::addr_of_dist(d, eff_n, cls.addr_t);
            LightSet L = light_set(d, k);
            Rat mass = light_one_mass(d, L, fn);
            if (mass > beta) {
                Witness w;
                w.source_index = i;
                w.measured = mass;
                res.witness = w;
                break;
            }
        }
        res.ok = false;
        return res;
    }

    res.ok = true;
    res.spec.verified = cls.mode == sources::EnumMode::RandomSample ? Verified::Sampled : Verified::Exhaustive;
    return res;
}

HashFamily::HashFamily(int n_bits, int m_bits, int t_wise) : n(n_bits), m(m_bits), t(t_wise) {
    if (n < 1 || n > 24) throw ValidationError("hash family input bits out of range");
    if (m < 1 || m > n) throw ValidationError("hash family output bits out of range");
    if (t < 1) throw ValidationError("hash family needs t >= 1");
}

Int HashFamily::family_size() const {
    Int v = 1;
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), static_cast<uint64_t>(t) * static_cast<uint64_t>(n));
    return v;
}

std::vector<uint32_t> HashFamily::coeffs(const Int& index) const {
    std::vector<uint32_t> cs(static_cast<size_t>(t), 0);
    for (int i = 0; i < t; ++i)
        for (int b = 0; b < n; ++b)
            if (mpz_tstbit(index.get_mpz_t(), static_cast<uint64_t>(i) * n + b)) cs[static_cast<size_t>(i)] |= uint32_t{1} << b;
    return cs;
}

uint32_t HashFamily::eval(const std::vector<uint32_t>& cs, uint32_t x) const {
    // Horner over GF(2^n): sum_{i<t} a_i x^i.
    uint32_t acc = 0;
    for (int i = t - 1; i >= 0; --i) acc = f2::gf2w_mul_raw(n, acc, x) ^ cs[static_cast<size_t>(i)];
    return acc & ((m == 32 ? 0 : (uint32_t{1} << m)) - 1u);
}

MultiOutFnTable HashFamily::member_table(const Int& index) const {
    auto cs = coeffs(index);
    std::vector<uint32_t> vals(uint64_t{1} << n);
    for (uint64_t x = 0; x < vals.size(); ++x) vals[x] = eval(cs, static_cast<uint32_t>(x));
    return MultiOutFnTable(n, m, std::move(vals));
}

SearchResult search_isolator(const HashFamily& family, const Rat& alpha, const Rat& beta,
                             const KExp& k, const ClassSpec& cls, uint64_t member_budget, int jobs) {
    SearchResult out;
    if (alpha > 1) return out;  // impossible target, zero members tried

    Int fs = family.family_size();
    uint64_t limit = member_budget;
    if (fs <= Int(static_cast<unsigned long>(member_budget))) limit = mpz_get_ui(fs.get_mpz_t());

    for (uint64_t j = 0; j < limit; ++j) {
        Int idx(static_cast<unsigned long>(j));
        MultiOutFnTable h = family.member_table(idx);
        std::vector<uint8_t> g(h.size());
        for (uint64_t x = 0; x < h.size(); ++x) g[x] = h.get(x) == 0;
        BoolFnTable table = BoolFnTable::from_values(family.n, g);
        VerifyResult vr = verify_isolator(table, alpha, beta, k, cls, jobs);
        ++out.stats.members_tried;
        if (vr.ok) {
            out.found = true;
            out.member_index = idx;
            out.verified = std::move(vr);
            return out;
        }
        if (vr.witness && vr.witness->condition1_failed)
            ++out.stats.condition1_failures;
        else
            ++out.stats.condition2_failures;
    }
    return out;
}

InequalityReport lemma44_inequality(const Rat& N, const Rat& K, const Rat& p, int t, int ell,
                                    int d, int n, const Rat& alpha, const Rat& beta,
                                    unsigned long tail_constant) {
    if (t < 2 || (t % 2) != 0) throw ValidationError("t must be an even integer >= 2");
    if (n < 1 || ell < 1 || d < 1) throw ValidationError("parameters must be positive");
    if (sgn(N) <= 0 || sgn(K) <= 0) throw ValidationError("N and K must be positive");
    if (tail_constant == 0) throw ValidationError("tail constant must be positive");
    if (!(alpha < p && p < beta)) throw ValidationError("parameter ordering violated: need alpha < p < beta");
    auto pow_rat = [](const Rat& base, unsigned long e) {
        Int num, den;
        mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), e);
        mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), e);
        Rat r(num, den);
        r.canonicalize();
        return r;
    };
    unsigned long half_t = static_cast<unsigned long>(t) / 2;
    Rat tt(t);

    Rat s1 = pow_rat((N * p * tt + tt * tt) / (N * N * (p - alpha) * (p - alpha)), half_t);
    Rat s2 = pow_rat((K * p * tt + tt * tt) / (K * K * (beta - p) * (beta - p)), half_t);
    // 2^{binom(ell, <= d) * n} many degree-d sources with ell inputs.
    Int combos = 0;
    for (int i = 0; i <= std::min(d, ell); ++i) {
        Int c;
        mpz_bin_uiui(c.get_mpz_t(), static_cast<unsigned long>(ell), static_cast<unsigned long>(i));
        combos += c;
    }
    Int expo = combos * n;
    if (expo > 1000000) throw BudgetError("class-count exponent too large to evaluate exactly");
    Int classes = 1;
    mpz_mul_2exp(classes.get_mpz_t(), classes.get_mpz_t(), mpz_get_ui(expo.get_mpz_t()));

    InequalityReport rep;
    rep.lhs = s1 + Rat(classes) * s2;
    rep.threshold = Rat(1, tail_constant);
    rep.threshold.canonicalize();
    rep.holds = rep.lhs < rep.threshold;
    return rep;
}

InputReduceResult input_reduce(const F2PolyMap& f, int eps_log2, uint64_t budget, uint64_t seed) {
    if (eps_log2 < 1) throw ValidationError("epsilon must be below 1/2");
    const int r = f.n_inputs;
    const int n = f.n_outputs();
    const int ell = n + 3 * eps_log2;  // ceil(n + 3 log2(1/eps)), integral here
    Rat two_eps = pow2(1 - eps_log2);

    if (r <= ell) {
        // Nothing to compress: embed the inputs unchanged.
        std::vector<uint64_t> rows(static_cast<size_t>(r));
        for (int i = 0; i < r; ++i) rows[static_cast<size_t>(i)] = uint64_t{1} << i;
        InputReduceResult out{BitMatrix(r, ell, std::move(rows)), BitVec(0, r), Rat(0), true, 0, ell};
        return out;
    }
    if (r > 24) throw BudgetError("input_reduce seed space exceeds 2^24");

    ExactDist base = sources::exact_output(SourceSpec{sources::PolySource{f}});
    Rng rng(seed);
    InputReduceResult best{BitMatrix::identity(1), BitVec(0, 1), Rat(2), false, 0, ell};
    for (uint64_t cand = 0; cand < budget; ++cand) {
        // Uniform full-rank A via rejection.
        BitMatrix A = BitMatrix::identity(1);
        for (;;) {
            std::vector<uint64_t> rows(static_cast<size_t>(r));
            for (auto& row : rows) row = rng.bits(ell);
            BitMatrix cand_A(r, ell, std::move(rows));
            if (cand_A.rank() == ell) {
                A = std::move(cand_A);
                break;
            }
        }
        BitVec b(rng.bits(r), r);
        F2PolyMap h = f2::affine_substitute(f, A, b);
        ExactDist reduced = sources::exact_output(SourceSpec{sources::PolySource{h}});
        Rat tv = dist::tv_distance(base, reduced);
        ++best.candidates_tried;
        if (tv < best.achieved_tv) {
            best.A = A;
            best.b = b;
            best.achieved_tv = tv;
        }
        if (tv <= two_eps) {
            best.success = true;
            break;
        }
    }
    return best;
}

IsolatorSpec lift_isolator(const IsolatorSpec& bounded, int k) {
    if (k < 1) throw ValidationError("lift requires integral k >= 1");
    if (!bounded.k.integral() || bounded.k.k != k - 1)
        throw ValidationError("bounded isolator must be at min-entropy k-1");
    if (bounded.verified == Verified::Unverified)
        throw ValidationError("bounded isolator must be verified first");
    if (bounded.cls.model != sources::Model::Polynomial)
        throw ValidationError("lift applies to polynomial classes");
    const int want_r = 4 * (k + 1);
    bool covers = bounded.cls.r == want_r &&
                  (bounded.cls.r_upto || bounded.cls.mode == sources::EnumMode::AffineImages);
    if (!covers) throw ValidationError("bounded isolator class must cover all sources with 4(k+1) inputs");

    IsolatorSpec lifted = bounded;
    lifted.beta = bounded.beta + pow2(-k);
    lifted.k = KExp(k);
    lifted.verified = Verified::Unverified;
    lifted.cls.r = 0;  // unbounded-input claim; not enumerable
    lifted.degenerate = lifted.alpha <= lifted.beta;
    return lifted;
}

IsolatorSpec iso_from_rext(const MultiOutFnTable& rext, BitVec z, const Rat& eps, const Rat& delta,
                           const KExp& k, const ClassSpec& cls) {
    if (z.len != rext.m) throw ValidationError("z must have m bits");
    std::vector<uint8_t> vals(rext.size());
    for (uint64_t x = 0; x < rext.size(); ++x) vals[x] = rext.get(x) == z.bits;
    BoolFnTable fn = BoolFnTable::from_values(rext.n, vals);
    Rat inv_m = pow2(-rext.m);
    Rat alpha = inv_m - eps;
    if (sgn(alpha) < 0) alpha = 0;
    return IsolatorSpec(fn, alpha, inv_m + delta, k, cls);
}

MixtureBoundReport mixture_isolator_bound(const MultiOutFnTable& ext, const Mixture& parts,
                                          const std::vector<bool>& constant_tags, const Rat& eps,
                                          const KExp& k, const KExp& k_prime, const Rat& gamma) {
    if (constant_tags.size() != parts.size()) throw ValidationError("tag list length mismatch");
    if (sgn(eps) < 0 || sgn(gamma) < 0) throw ValidationError("eps and gamma must be nonnegative");
    for (size_t i = 0; i < parts.size(); ++i) {
        const ExactDist& part = parts.parts[i];
        if (constant_tags[i]) {
            bool point = false;
            for (uint64_t x = 0; x < part.size(); ++x)
                if (part.prob(x) == 1) point = true;
            if (!point) throw ValidationError("part tagged constant is not a point mass");
        } else if (!dist::has_min_entropy(part, k)) {
            throw ValidationError("part tagged high-min-entropy fails the entropy check");
        }
    }

    MixtureBoundReport rep;
    Rat ell(static_cast<unsigned long>(parts.size()));
    rep.bound = pow2(-ext.m) + eps + ell * pow2_neg_up(k_prime).value + 2 * gamma;

    ExactDist X = dist::mixture_collapse(parts);
    LightSet L = light_set(X, k_prime);
    Rat measured(0);
    for (uint64_t x = 0; x < X.size(); ++x)
        if (L.contains(x) && ext.get(x) == 0 && sgn(X.prob(x)) != 0) measured += X.prob(x);
    rep.measured = measured;
    rep.holds = measured <= rep.bound;
    return rep;
}

uint64_t ip_hash(uint64_t x, uint64_t y, int n, int m) {
    if (n < 1 || m < 1 || m > 32) throw ValidationError("ip_hash width out of range");
    const int blocks = (n + m - 1) / m;  // zero-padding to a block multiple
    const uint64_t mask = m == 64 ? ~uint64_t{0} : (uint64_t{1} << m) - 1;
    uint32_t acc = 0;
    for (int j = 0; j < blocks; ++j) {
        uint32_t bx = static_cast<uint32_t>((x >> (j * m)) & mask);
        uint32_t by = static_cast<uint32_t>((y >> (j * m)) & mask);
        acc ^= f2::gf2w_mul_raw(m, bx, by);
    }
    return acc;
}

MultiOutFnTable ip_hash_table(int n, int m) {
    if (2 * n > 24) throw ValidationError("ip_hash table too large");
    std::vector<uint32_t> vals(uint64_t{1} << (2 * n));
    for (uint64_t x = 0; x < (uint64_t{1} << n); ++x)
        for (uint64_t y = 0; y < (uint64_t{1} << n); ++y)
            vals[x | (y << n)] = static_cast<uint32_t>(ip_hash(x, y, n, m));
    return MultiOutFnTable(2 * n, m, std::move(vals));
}

TwoSourceReport two_source_robust_bound(const ExactDist& X, const ExactDist& Y,
                                        const MultiOutFnTable& ext, int k, int k0, int k1, int k2,
                                        const Rat& eps, uint64_t z) {
    if (!(k > k1 + k2) || !(k1 > k0)) throw ValidationError("parameter ordering violated");
    if (X.n() != Y.n()) throw ValidationError("two-source inputs must have equal length");
    const int n = X.n();
    if (ext.n != 2 * n) throw ValidationError("extractor table must take both sources");

    Rat thr = pow2(-k);
    Rat measured(0);
    for (uint64_t x = 0; x < X.size(); ++x) {
        if (sgn(X.prob(x)) == 0) continue;
        for (uint64_t y = 0; y < Y.size(); ++y) {
            if (sgn(Y.prob(y)) == 0) continue;
            Rat joint = X.prob(x) * Y.prob(y);
            if (joint <= thr && ext.get(x | (y << n)) == z) measured += joint;
        }
    }
    Rat alt = pow2(-(k1 - k0));
    Rat ext_term = pow2(-ext.m) + eps;
    TwoSourceReport rep;
    rep.measured = measured;
    rep.bound = pow2(n + 1 - k2) + (ext_term > alt ? ext_term : alt);
    rep.holds = measured <= rep.bound;
    return rep;
}

IsolatorSpec comm_isolator_bound(const IsolatorSpec& iso, int ell, const Rat& t_shift) {
    if (ell < 0) throw ValidationError("mixture exponent must be nonnegative");
    Rat expnt = t_shift - ell;  // beta' = 2^{-(t_shift - ell)} + beta
    Rat gain;
    if (expnt.get_den() == 1) {
        gain = pow2(-static_cast<long>(mpz_get_si(expnt.get_num().get_mpz_t())));
    } else if (sgn(expnt) > 0) {
        // Round the bound term up so the claim stays an upper bound.
        gain = pow2_neg_up(KExp(expnt)).value;
    } else {
        gain = 1;  // 2^{-e} >= 1 for e <= 0; claim is vacuous anyway
    }
    IsolatorSpec lifted = iso;
    lifted.beta = iso.beta + gain;
    lifted.k = KExp(iso.k.k + t_shift);
    lifted.verified = Verified::Unverified;
    lifted.degenerate = lifted.alpha <= lifted.beta;
    return lifted;
}

FlatCheckReport flat_robustness_check(const MultiOutFnTable& ext, int k, const Rat& eps,
                                      uint64_t min_support, uint64_t max_support,
                                      uint64_t sample_count, uint64_t seed) {
    const int n = ext.n;
    const uint64_t N = uint64_t{1} << n;
    if (sample_count == 0 && n > 5) throw ValidationError("full support enumeration capped at n <= 5");
    if (min_support < 1 || max_support > N || min_support > max_support)
        throw ValidationError("support size range invalid");
    if (sgn(eps) < 0) throw ValidationError("eps must be nonnegative");

    // zeros_mask marks inputs hashing to 0^m.
    std::vector<uint64_t> zeros_mask((N + 63) / 64, 0);
    for (uint64_t x = 0; x < N; ++x)
        if (ext.get(x) == 0) zeros_mask[x >> 6] |= uint64_t{1} << (x & 63);

    const uint64_t entropy_cut = uint64_t{1} << k;  // |S| >= 2^k <=> all points light
    Rat bound = pow2(-ext.m) + eps;
    // Largest allowed zero-count per support size: cnt/s <= bound.
    std::vector<uint64_t> max_cnt(max_support + 1, 0);
    for (uint64_t s = min_support; s <= max_support; ++s) {
        Rat lim = bound * static_cast<unsigned long>(s);
        Int fl = lim.get_num() / lim.get_den();
        max_cnt[s] = fl < 0 ? 0 : mpz_get_ui(fl.get_mpz_t());
    }

    FlatCheckReport rep;
    rep.max_measured = 0;
    auto check_support = [&](const std::vector<uint64_t>& mask, uint64_t s, uint64_t id) {
        ++rep.checked;
        if (s < entropy_cut) {
            // Every support point is heavy, so the light set misses S and the
            // measured probability is exactly zero.
            ++rep.small_support_cases;
            return true;
        }
        ++rep.high_entropy_cases;
        uint64_t cnt = 0;
        for (size_t w = 0; w < mask.size(); ++w) cnt += static_cast<uint64_t>(std::popcount(mask[w] & zeros_mask[w]));
        Rat measured(static_cast<unsigned long>(cnt), static_cast<unsigned long>(s));
        measured.canonicalize();
        if (measured > rep.max_measured) rep.max_measured = measured;
        if (cnt > max_cnt[s]) {
            rep.violating_support = id;
            return false;
        }
        return true;
    };

    if (sample_count == 0) {
        // All nonempty supports, encoded by their bitmask.
        std::vector<uint64_t> mask(1);
        for (uint64_t sm = 1; sm < (uint64_t{1} << N); ++sm) {
            uint64_t s = static_cast<uint64_t>(std::popcount(sm));
            if (s < min_support || s > max_support) continue;
            mask[0] = sm;
            if (!check_support(mask, s, sm)) {
                rep.ok = false;
                return rep;
            }
        }
    } else {
        Rng rng(seed);
        for (uint64_t trial = 0; trial < sample_count; ++trial) {
            uint64_t s = min_support + rng.below(max_support - min_support + 1);
            auto pts = rng.distinct(s, N);
            std::vector<uint64_t> mask((N + 63) / 64, 0);
            for (uint64_t p : pts) mask[p >> 6] |= uint64_t{1} << (p & 63);
            if (!check_support(mask, s, trial)) {
                rep.ok = false;
                return rep;
            }
        }
    }
    rep.ok = true;
    return rep;
}

Rat flat_extractor_error(const MultiOutFnTable& ext, int k) {
    const int n = ext.n;
    if (n > 4) throw ValidationError("exhaustive flat extractor error capped at n <= 4");
    const uint64_t N = uint64_t{1} << n;
    const uint64_t cut = uint64_t{1} << k;
    const uint32_t M = uint32_t{1} << ext.m;

    // Track max TV as an integer fraction num/(2 * s * 2^m).
    uint64_t best_num = 0, best_den = 1;
    std::vector<uint32_t> hist(M);
    for (uint64_t sm = 1; sm < (uint64_t{1} << N); ++sm) {
        uint64_t s = static_cast<uint64_t>(std::popcount(sm));
        if (s < cut) continue;
        std::fill(hist.begin(), hist.end(), 0);
        uint64_t rest = sm;
        while (rest) {
            int x = std::countr_zero(rest);
            rest &= rest - 1;
            ++hist[ext.get(static_cast<uint64_t>(x))];
        }
        // TV = (1/2) sum_v |hist[v]/s - 1/2^m| = sum |hist[v]*2^m - s| / (2 s 2^m)
        uint64_t num = 0;
        for (uint32_t v = 0; v < M; ++v) {
            int64_t d = static_cast<int64_t>(hist[v]) * M - static_cast<int64_t>(s);
            num += static_cast<uint64_t>(d < 0 ? -d : d);
        }
        uint64_t den = 2 * s * M;
        if (static_cast<unsigned __int128>(num) * best_den > static_cast<unsigned __int128>(best_num) * den) {
            best_num = num;
            best_den = den;
        }
    }
    Rat r(static_cast<unsigned long>(best_num), static_cast<unsigned long>(best_den));
    r.canonicalize();
    return r;
}

}  // namespace isolab::iso
