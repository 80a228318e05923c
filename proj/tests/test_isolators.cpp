#include "doctest.h"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "isolab/isolators.hpp"
#include "isolab/json_io.hpp"

using namespace isolab;
using namespace isolab::iso;
using dist::ExactDist;
using sources::ClassSpec;
using sources::EnumMode;
using sources::Model;
using sources::SourceSpec;

namespace {

ClassSpec explicit_class(const std::vector<ExactDist>& dists) {
    ClassSpec c;
    c.model = Model::Explicit;
    c.n_out = dists.front().n();
    for (const auto& d : dists)
        c.members.push_back(SourceSpec{sources::MixtureSource{dist::Mixture({Rat(1)}, {d})}});
    return c;
}

ClassSpec degree1_class(int r, int n, bool upto, EnumMode mode = EnumMode::Exhaustive) {
    ClassSpec c;
    c.model = Model::Polynomial;
    c.n_out = n;
    c.r = r;
    c.r_upto = upto;
    c.degree = 1;
    c.mode = mode;
    return c;
}

BoolFnTable table_of(int n, const std::vector<uint64_t>& ones) {
    std::vector<uint8_t> vals(uint64_t{1} << n, 0);
    for (uint64_t x : ones) vals[x] = 1;
    return BoolFnTable::from_values(n, vals);
}

MultiOutFnTable random_table(Rng& rng, int n, int m) {
    std::vector<uint32_t> vals(uint64_t{1} << n);
    for (auto& v : vals) v = static_cast<uint32_t>(rng.bits(m));
    return MultiOutFnTable(n, m, vals);
}

ExactDist flat_dist(int n, const std::vector<uint64_t>& support) {
    std::vector<Rat> p(uint64_t{1} << n, Rat(0));
    Rat u(1, static_cast<unsigned long>(support.size()));
    u.canonicalize();
    for (uint64_t x : support) p[x] = u;
    return ExactDist::from_probs(n, std::move(p));
}

}  // namespace

TEST_CASE("verify_isolator on the uniform singleton class") {
    // Iso = 1(first string position is 0): accepts indices with bit0 = 0.
    BoolFnTable fn = table_of(2, {0, 2});
    ClassSpec cls = explicit_class({ExactDist::uniform(2)});
    auto res = verify_isolator(fn, Rat(1, 2), Rat(1, 2), KExp(2), cls);
    CHECK(res.ok);
    CHECK(res.spec.verified == Verified::Exhaustive);
    CHECK(res.uniform_accept == Rat(1, 2));
    CHECK(res.max_light_mass == Rat(1, 2));

    auto tight = verify_isolator(fn, Rat(1, 2), Rat(1, 4), KExp(2), cls);
    CHECK_FALSE(tight.ok);
    REQUIRE(tight.witness.has_value());
    CHECK(tight.witness->source_index == 0);
    CHECK(tight.witness->measured == Rat(1, 2));
}

TEST_CASE("constant-zero table fails condition 1 for positive alpha") {
    BoolFnTable fn = BoolFnTable::constant(2, false);
    ClassSpec cls = explicit_class({ExactDist::uniform(2)});
    auto res = verify_isolator(fn, Rat(1, 100), Rat(1), KExp(1), cls);
    CHECK_FALSE(res.ok);
    REQUIRE(res.witness.has_value());
    CHECK(res.witness->condition1_failed);
    CHECK(verify_isolator(fn, Rat(0), Rat(1), KExp(1), cls).ok);
}

TEST_CASE("verify_isolator sweep over the degree-1 class is its own oracle") {
    // Iso = 1(x = 000) against all 4096 degree-1 maps with r = 3, n = 3.
    BoolFnTable fn = table_of(3, {0});
    ClassSpec cls = degree1_class(3, 3, false);
    sources::ClassEnum en(cls);
    Rat beta_star(0);
    for (uint64_t i = 0; i < en.size(); ++i) {
        auto d = en.dist_at(i);
        auto L = dist::light_set(d, KExp(1));
        Rat mass(0);
        for (uint64_t x = 0; x < d.size(); ++x)
            if (L.contains(x) && fn.get(x)) mass += d.prob(x);
        if (mass > beta_star) beta_star = mass;
    }
    auto ok = verify_isolator(fn, Rat(1, 8), beta_star, KExp(1), cls);
    CHECK(ok.ok);
    CHECK(ok.max_light_mass == beta_star);
    auto bad = verify_isolator(fn, Rat(1, 8), beta_star - Rat(1, 1000), KExp(1), cls);
    CHECK_FALSE(bad.ok);
}

TEST_CASE("hash family: canonical coefficients and t-wise uniformity") {
    HashFamily fam(3, 1, 2);
    CHECK(fam.family_size() == 64);
    auto cs = fam.coeffs(Int(0b101011));
    CHECK(cs[0] == 0b011);
    CHECK(cs[1] == 0b101);

    // Exact equidistribution over distinct-point tuples, full enumeration.
    for (int t = 1; t <= 3; ++t) {
        for (int m = 1; m <= 2; ++m) {
            HashFamily f(3, m, t);
            uint64_t family = 1ull << (3 * t);
            std::vector<uint64_t> pts = {1, 3, 6};
            pts.resize(static_cast<size_t>(t));
            std::map<std::vector<uint32_t>, uint64_t> counts;
            for (uint64_t idx = 0; idx < family; ++idx) {
                auto c = f.coeffs(Int(static_cast<unsigned long>(idx)));
                std::vector<uint32_t> key;
                for (uint64_t p : pts) key.push_back(f.eval(c, static_cast<uint32_t>(p)));
                ++counts[key];
            }
            uint64_t want = family >> (static_cast<uint64_t>(m) * t);
            CHECK(counts.size() == (uint64_t{1} << (static_cast<uint64_t>(m) * t)));
            for (const auto& [key, cnt] : counts) CHECK(cnt == want);
        }
    }
}

TEST_CASE("search_isolator finds and re-verifies a member") {
    ClassSpec cls = explicit_class({ExactDist::uniform(4)});
    HashFamily fam(4, 1, 2);
    auto res = search_isolator(fam, Rat(1, 4), Rat(3, 4), KExp(4), cls, 4096);
    REQUIRE(res.found);
    REQUIRE(res.verified.has_value());
    CHECK(res.verified->ok);
    CHECK(res.verified->spec.verified == Verified::Exhaustive);

    // The found member's indicator really is 1(h(x) = 0^m).
    auto h = fam.member_table(res.member_index);
    for (uint64_t x = 0; x < h.size(); ++x) CHECK(res.verified->spec.fn.get(x) == (h.get(x) == 0));

    // Canonical order: it is the first member that verifies.
    for (Int j = 0; j < res.member_index; ++j) {
        auto hj = fam.member_table(j);
        std::vector<uint8_t> gj(hj.size());
        for (uint64_t x = 0; x < hj.size(); ++x) gj[x] = hj.get(x) == 0;
        auto earlier = verify_isolator(BoolFnTable::from_values(fam.n, gj), Rat(1, 4), Rat(3, 4),
                                       KExp(4), cls);
        CHECK_FALSE(earlier.ok);
    }
}

TEST_CASE("search_isolator with impossible target reports zero members") {
    ClassSpec cls = explicit_class({ExactDist::uniform(3)});
    HashFamily fam(3, 1, 2);
    auto res = search_isolator(fam, Rat(3, 2), Rat(1), KExp(1), cls, 100);
    CHECK_FALSE(res.found);
    CHECK(res.stats.members_tried == 0);
}

TEST_CASE("search_isolator over a degree-1 class; found member passes verification") {
    ClassSpec cls = degree1_class(3, 3, true);
    HashFamily fam(3, 1, 2);
    auto res = search_isolator(fam, Rat(1, 4), Rat(5, 8), KExp(2), cls, 64);
    if (res.found) {
        CHECK(res.verified->ok);
        auto recheck = verify_isolator(res.verified->spec.fn, Rat(1, 4), Rat(5, 8), KExp(2), cls);
        CHECK(recheck.ok);
    } else {
        CHECK(res.stats.members_tried == 64);
    }
}

TEST_CASE("tail inequality: degenerate gap rejected, exact evaluation cross-checked") {
    CHECK_THROWS_AS((void)lemma44_inequality(pow2(16), pow2(8), Rat(1, 2), 4, 2, 1, 2, Rat(1, 2), Rat(3, 4)),
                    ValidationError);

    auto rep = lemma44_inequality(pow2(16), pow2(8), Rat(1, 2), 4, 2, 1, 2, Rat(1, 4), Rat(3, 4));
    // Independent route: clear denominators and compare integers.
    // S1 = ((2^17 + 16) / 2^28)^2, S2 = 2^6 ((2^9 + 16) / 2^12)^2.
    Rat s1 = Rat(Int(131088) * Int(131088), Int(1) << 56);
    Rat s2 = Rat(Int(64) * Int(528) * Int(528), Int(1) << 24);
    s1.canonicalize();
    s2.canonicalize();
    CHECK(rep.lhs == s1 + s2);
    CHECK(rep.holds == (rep.lhs < Rat(1, 8)));
    CHECK_FALSE(rep.holds);  // the second summand alone exceeds 1/8 here

    auto loose = lemma44_inequality(pow2(16), pow2(8), Rat(1, 2), 4, 2, 1, 2, Rat(1, 4), Rat(3, 4), 2);
    CHECK(loose.threshold == Rat(1, 2));
}

TEST_CASE("tail inequality first summand shrinks when t doubles in the small-base regime") {
    auto first_summand = [](int t) {
        Rat N = pow2(16), p(1, 2), alpha(1, 4);
        Rat base = (N * p * t + Rat(t) * t) / (N * N * (p - alpha) * (p - alpha));
        Int num, den;
        mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), static_cast<unsigned long>(t) / 2);
        mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), static_cast<unsigned long>(t) / 2);
        Rat r(num, den);
        r.canonicalize();
        return r;
    };
    for (int t : {4, 8, 16}) CHECK(first_summand(2 * t) <= first_summand(t));
}

TEST_CASE("input_reduce: maps with few inputs embed exactly") {
    // f depends only on x1; with eps = 1/4 and n = 1, ell = 7 >= r = 4.
    f2::F2PolyMap f(4, 1, {f2::F2Poly::variable(4, 0)});
    auto res = input_reduce(f, 2, 100, 1);
    CHECK(res.success);
    CHECK(res.achieved_tv == 0);
    CHECK(res.ell == 7);
    CHECK(res.candidates_tried == 0);
}

TEST_CASE("input_reduce: projection-surjective reductions reach tv 0") {
    // Identity on the first 2 outputs with r = 7 inputs; eps = 1/2 so ell = 5.
    f2::F2PolyMap f(7, 1, {f2::F2Poly::variable(7, 0), f2::F2Poly::variable(7, 1)});
    auto res = input_reduce(f, 1, 2000, 7);
    CHECK(res.success);
    CHECK(res.achieved_tv == 0);
    CHECK(res.ell == 5);
    // Exact re-verification of the returned candidate.
    auto h = f2::affine_substitute(f, res.A, res.b);
    auto base = sources::exact_output(SourceSpec{sources::PolySource{f}});
    auto red = sources::exact_output(SourceSpec{sources::PolySource{h}});
    CHECK(dist::tv_distance(base, red) == res.achieved_tv);
}

TEST_CASE("input_reduce hits the guarantee on random degree-2 maps") {
    Rng rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        auto f = sources::random_poly_map(rng, 8, 1, 2);
        auto res = input_reduce(f, 2, 3000, 100 + static_cast<uint64_t>(trial));
        CHECK(res.ell == 7);
        CHECK(res.success);
        CHECK(res.achieved_tv <= Rat(1, 2));
        auto h = f2::affine_substitute(f, res.A, res.b);
        CHECK(h.degree() <= f.degree());
        auto base = sources::exact_output(SourceSpec{sources::PolySource{f}});
        auto red = sources::exact_output(SourceSpec{sources::PolySource{h}});
        CHECK(dist::tv_distance(base, red) == res.achieved_tv);
    }
}

TEST_CASE("lift_isolator arithmetic and exhaustive recheck of the lifted claim") {
    const int k = 2;
    BoolFnTable fn = table_of(3, {0, 3, 5});
    ClassSpec bounded_cls = degree1_class(4 * (k + 1), 3, false, EnumMode::AffineImages);

    // Measure the exact beta at min-entropy k-1 over the bounded class.
    sources::ClassEnum en(bounded_cls);
    Rat beta(0);
    for (uint64_t i = 0; i < en.size(); ++i) {
        auto d = en.dist_at(i);
        auto L = dist::light_set(d, KExp(k - 1));
        Rat mass(0);
        for (uint64_t x = 0; x < d.size(); ++x)
            if (L.contains(x) && fn.get(x)) mass += d.prob(x);
        if (mass > beta) beta = mass;
    }
    auto base = verify_isolator(fn, Rat(3, 8), beta, KExp(k - 1), bounded_cls);
    REQUIRE(base.ok);

    auto lifted = lift_isolator(base.spec, k);
    CHECK(lifted.beta == beta + Rat(1, 4));
    CHECK(lifted.k.k == k);
    CHECK(lifted.verified == Verified::Unverified);

    // Lemma arithmetic check: beta' - beta = 2^{-k} -> 0 as k grows.
    CHECK(lifted.beta - base.spec.beta == pow2(-k));

    // Recheck the lifted parameters on a wider input bound.
    ClassSpec wide = degree1_class(4 * (k + 1) + 2, 3, false, EnumMode::AffineImages);
    auto recheck = verify_isolator(fn, lifted.alpha, lifted.beta, lifted.k, wide);
    CHECK(recheck.ok);

    // Preconditions: wrong k or wrong class bound are rejected.
    CHECK_THROWS_AS((void)lift_isolator(base.spec, k + 1), ValidationError);
    auto narrow = verify_isolator(fn, Rat(3, 8), Rat(1), KExp(k - 1), degree1_class(4, 3, true));
    CHECK_THROWS_AS((void)lift_isolator(narrow.spec, k), ValidationError);
}

TEST_CASE("bounded family search composed with the lift") {
    // Full pipeline: search a t-wise family for an isolator over the
    // bounded-input class at min-entropy k-1, lift it to the unbounded-input
    // claim at k, and confirm the lifted parameters on a wider input bound.
    // k-1 = n keeps the light threshold below every non-full-support member's
    // atom mass, which is the only regime with nonvacuous beta at this size.
    const int n = 3, k = n + 1;
    ClassSpec bounded = degree1_class(4 * (k + 1), n, false, EnumMode::AffineImages);
    HashFamily fam(n, 1, 2);
    auto found = search_isolator(fam, Rat(1, 4), Rat(3, 4), KExp(k - 1), bounded, 64);
    REQUIRE(found.found);
    REQUIRE(found.verified->ok);

    auto lifted = lift_isolator(found.verified->spec, k);
    CHECK(lifted.beta == Rat(3, 4) + pow2(-k));
    CHECK(lifted.cls.r == 0);  // unbounded-input claim

    ClassSpec wide = degree1_class(4 * (k + 1) + 4, n, false, EnumMode::AffineImages);
    auto confirm = verify_isolator(lifted.fn, lifted.alpha, lifted.beta, lifted.k, wide);
    CHECK(confirm.ok);
}

TEST_CASE("iso_from_rext basics") {
    // rext = identity bit on n = 1, z = 0.
    MultiOutFnTable rext(1, 1, {0, 1});
    ClassSpec cls = explicit_class({ExactDist::uniform(1)});
    auto spec = iso_from_rext(rext, f2::BitVec(0, 1), Rat(0), Rat(0), KExp(1), cls);
    CHECK(spec.alpha == Rat(1, 2));
    CHECK(spec.beta == Rat(1, 2));
    CHECK(spec.fn.get(0));
    CHECK_FALSE(spec.fn.get(1));
    auto confirm = verify_isolator(spec.fn, spec.alpha, spec.beta, spec.k, cls);
    CHECK(confirm.ok);

    // eps = 2^{-m} collapses alpha to 0: degenerate but admissible.
    auto degen = iso_from_rext(rext, f2::BitVec(0, 1), Rat(1, 2), Rat(0), KExp(1), cls);
    CHECK(degen.alpha == 0);
    CHECK(degen.degenerate);

    CHECK_THROWS_AS((void)iso_from_rext(rext, f2::BitVec(0, 2), Rat(0), Rat(0), KExp(1), cls),
                    ValidationError);
}

TEST_CASE("iso_from_rext claims confirmed for a measured robust extractor") {
    Rng rng(77);
    MultiOutFnTable rext = random_table(rng, 4, 2);
    // Class: uniform plus a few flat sources of support >= 2^k.
    std::vector<ExactDist> dists = {ExactDist::uniform(4)};
    for (int i = 0; i < 6; ++i) dists.push_back(flat_dist(4, rng.distinct(4 + rng.below(9), 16)));
    ClassSpec cls = explicit_class(dists);
    const KExp k(2);

    // Measure eps (uniform-error at z) and delta (max light mass at z) exactly.
    uint64_t zeros = 0;
    for (uint64_t x = 0; x < 16; ++x)
        if (rext.get(x) == 0) ++zeros;
    Rat eps = Rat(static_cast<unsigned long>(zeros), 16) - Rat(1, 4);
    if (sgn(eps) < 0) eps = -eps;
    Rat delta(0);
    for (const auto& d : dists) {
        auto L = dist::light_set(d, k);
        Rat mass(0);
        for (uint64_t x = 0; x < 16; ++x)
            if (L.contains(x) && rext.get(x) == 0) mass += d.prob(x);
        Rat excess = mass - Rat(1, 4);
        if (excess > delta) delta = excess;
    }

    auto spec = iso_from_rext(rext, f2::BitVec(0, 2), eps, delta, k, cls);
    auto confirm = verify_isolator(spec.fn, spec.alpha, spec.beta, spec.k, cls);
    CHECK(confirm.ok);
}

TEST_CASE("mixture bound: constant parts outside the light set contribute nothing") {
    MultiOutFnTable ext(3, 1, {0, 1, 0, 1, 0, 1, 0, 1});
    dist::Mixture mix({Rat(1, 2), Rat(1, 2)},
                      {ExactDist::point_mass(3, 0), ExactDist::point_mass(3, 5)});
    auto rep = mixture_isolator_bound(ext, mix, {true, true}, Rat(0), KExp(3), KExp(2), Rat(0));
    CHECK(rep.measured == 0);
    CHECK(rep.holds);
}

TEST_CASE("mixture bound: single uniform part obeys the extractor term") {
    Rng rng(5);
    MultiOutFnTable ext = random_table(rng, 4, 1);
    uint64_t zeros = 0;
    for (uint64_t x = 0; x < 16; ++x)
        if (ext.get(x) == 0) ++zeros;
    Rat eps = Rat(static_cast<unsigned long>(zeros), 16) - Rat(1, 2);
    if (sgn(eps) < 0) eps = -eps;
    dist::Mixture mix({Rat(1)}, {ExactDist::uniform(4)});
    auto rep = mixture_isolator_bound(ext, mix, {false}, eps, KExp(4), KExp(3), Rat(0));
    CHECK(rep.holds);
    CHECK(rep.measured <= Rat(1, 2) + eps);
}

TEST_CASE("mixture bound holds on random tagged mixtures") {
    Rng rng(31);
    const int n = 6, k = 3;
    for (int trial = 0; trial < 25; ++trial) {
        MultiOutFnTable ext = random_table(rng, n, 1);
        std::vector<ExactDist> parts;
        std::vector<bool> tags;
        for (int i = 0; i < 2; ++i) {
            parts.push_back(flat_dist(n, rng.distinct((uint64_t{1} << k) + rng.below(40), 64)));
            tags.push_back(false);
        }
        for (int i = 0; i < 2; ++i) {
            parts.push_back(ExactDist::point_mass(n, rng.below(64)));
            tags.push_back(true);
        }
        dist::Mixture mix({Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 4)}, parts);
        // eps = exact max extractor error over the high-entropy parts.
        Rat eps(0);
        for (size_t i = 0; i < parts.size(); ++i) {
            if (tags[i]) continue;
            std::vector<Rat> out(2, Rat(0));
            for (uint64_t x = 0; x < 64; ++x) out[ext.get(x)] += parts[i].prob(x);
            Rat err = out[0] - Rat(1, 2);
            if (sgn(err) < 0) err = -err;
            if (err > eps) eps = err;
        }
        auto rep = mixture_isolator_bound(ext, mix, tags, eps, KExp(k), KExp(4), Rat(0));
        CHECK(rep.holds);
    }
    // Tag verification failure: a spread-out part tagged constant.
    MultiOutFnTable ext = random_table(rng, 2, 1);
    dist::Mixture bad({Rat(1)}, {ExactDist::uniform(2)});
    CHECK_THROWS_AS((void)mixture_isolator_bound(ext, bad, {true}, Rat(0), KExp(1), KExp(1), Rat(0)),
                    ValidationError);
}

TEST_CASE("ip_hash basics and the GF(2^2) oracle") {
    CHECK(ip_hash(0b1101, 0, 4, 1) == 0);
    CHECK(ip_hash(0b1101, 0, 4, 2) == 0);
    // m = 1: plain inner product mod 2; x = "11", y = "10".
    CHECK(ip_hash(f2::BitVec::from_string("11").bits, f2::BitVec::from_string("10").bits, 2, 1) == 1);

    // m = 2, n = 4: blocks (1,3) and (2,1) as GF(4) elements.
    uint64_t x = f2::BitVec::from_string("1011").bits;
    uint64_t y = f2::BitVec::from_string("0110").bits;
    uint32_t want = 0;
    {
        // log-table oracle for GF(4): exp table built from the generator 0b10
        uint32_t exp_table[3];
        exp_table[0] = 1;
        for (int i = 1; i < 3; ++i) {
            uint32_t prev = exp_table[i - 1];
            uint32_t doubled = prev << 1;
            if (doubled & 0b100) doubled ^= 0b111;  // x^2 + x + 1
            exp_table[i] = doubled;
        }
        auto log_of = [&](uint32_t v) {
            for (int i = 0; i < 3; ++i)
                if (exp_table[i] == v) return i;
            return -1;
        };
        auto mul = [&](uint32_t a, uint32_t b) -> uint32_t {
            if (a == 0 || b == 0) return 0;
            return exp_table[(log_of(a) + log_of(b)) % 3];
        };
        want = mul(static_cast<uint32_t>(x & 3), static_cast<uint32_t>(y & 3)) ^
               mul(static_cast<uint32_t>((x >> 2) & 3), static_cast<uint32_t>((y >> 2) & 3));
    }
    CHECK(ip_hash(x, y, 4, 2) == want);
    CHECK(want == 1);
}

TEST_CASE("ip_hash with m = 1 equals the bitwise inner product") {
    for (int n : {3, 5, 6}) {
        for (uint64_t x = 0; x < (uint64_t{1} << n); ++x)
            for (uint64_t y = 0; y < (uint64_t{1} << n); ++y)
                CHECK(ip_hash(x, y, n, 1) == static_cast<uint64_t>(std::popcount(x & y) & 1));
    }
}

TEST_CASE("leftover hash regime: flat pairs extract within eps") {
    Rng rng(404);
    const int n = 8;
    for (int m = 1; m <= 2; ++m) {
        // min-entropy >= (n+m)/2 + log(1/eps) with eps = 1/4
        uint64_t min_sz = m == 1 ? 91 : 128;  // ceil(2^{(n+m)/2 + 2})
        for (int trial = 0; trial < 25; ++trial) {
            auto sx = rng.distinct(min_sz + rng.below(257 - min_sz), 256);
            auto sy = rng.distinct(min_sz + rng.below(257 - min_sz), 256);
            std::vector<uint64_t> hist(uint64_t{1} << m, 0);
            for (uint64_t a : sx)
                for (uint64_t b : sy) ++hist[ip_hash(a, b, n, m)];
            // TV to uniform over m bits, exact in integers.
            uint64_t total = sx.size() * sy.size();
            Rat tv(0);
            for (uint64_t v = 0; v < hist.size(); ++v) {
                Rat diff = Rat(static_cast<unsigned long>(hist[v]), static_cast<unsigned long>(total)) -
                           pow2(-m);
                if (sgn(diff) < 0) diff = -diff;
                tv += diff;
            }
            tv /= 2;
            CHECK(tv <= Rat(1, 4));
        }
    }
}

TEST_CASE("two-source robustness bound") {
    auto ext1 = ip_hash_table(4, 1);
    // generous parameters; uniform sources make every pair heavy vs 2^-12
    auto rep = two_source_robust_bound(ExactDist::uniform(4), ExactDist::uniform(4), ext1, 12, 4, 5, 6,
                                       Rat(1, 2), 0);
    CHECK(rep.holds);

    // X a point mass: light pairs live on zero-probability rows only.
    auto rep2 = two_source_robust_bound(ExactDist::point_mass(4, 7), ExactDist::uniform(4), ext1, 12, 4,
                                        5, 6, Rat(1, 2), 0);
    CHECK(rep2.holds);
    CHECK(rep2.measured == 0);

    // k2 = n + 1 makes the first bound term 1: vacuous.
    auto rep3 = two_source_robust_bound(ExactDist::uniform(4), ExactDist::uniform(4), ext1, 12, 3, 4, 5,
                                        Rat(1, 2), 0);
    CHECK(rep3.bound >= 1);
    CHECK(rep3.holds);

    CHECK_THROWS_AS((void)two_source_robust_bound(ExactDist::uniform(4), ExactDist::uniform(4), ext1, 8,
                                                  4, 5, 6, Rat(1, 2), 0),
                    ValidationError);
}

TEST_CASE("comm mixture lift: formula cases") {
    BoolFnTable fn = table_of(2, {0, 1});
    ClassSpec cls = explicit_class({ExactDist::uniform(2)});
    auto base = verify_isolator(fn, Rat(1, 2), Rat(1, 2), KExp(1), cls);
    REQUIRE(base.ok);

    auto vac = comm_isolator_bound(base.spec, 2, Rat(2));  // ell = t: beta' = 1 + beta
    CHECK(vac.beta == Rat(3, 2));
    CHECK(vac.degenerate);

    auto single = comm_isolator_bound(base.spec, 0, Rat(3));  // ell = 0: beta' = 2^-t + beta
    CHECK(single.beta == Rat(1, 2) + Rat(1, 8));
    CHECK(single.k.k == 4);
}

TEST_CASE("comm mixture lift confirmed exhaustively on cost-1 protocols") {
    // Iso on (x, y) pairs of 2 bits each: accept when the block inner product
    // vanishes. alpha = 10/16.
    std::vector<uint8_t> vals(16);
    for (uint64_t w = 0; w < 16; ++w) vals[w] = ip_hash(w & 3, w >> 2, 2, 1) == 0;
    BoolFnTable fn = BoolFnTable::from_values(4, vals);

    // Parts class: all products of per-side conditional outputs a 1-bit
    // randomness protocol can produce (point masses and half-half pairs).
    std::vector<ExactDist> sides;
    for (uint64_t a = 0; a < 4; ++a) sides.push_back(ExactDist::point_mass(2, a));
    for (uint64_t a = 0; a < 4; ++a)
        for (uint64_t b = a + 1; b < 4; ++b) sides.push_back(flat_dist(2, {a, b}));
    std::vector<ExactDist> products;
    for (const auto& pa : sides)
        for (const auto& pb : sides) products.push_back(dist::product(pa, pb));
    ClassSpec parts_cls = explicit_class(products);

    const int k = 5, t_shift = 3, ell = 1;
    // Exact beta for the parts class at min-entropy k - t_shift.
    Rat beta(0);
    for (const auto& d : products) {
        auto L = dist::light_set(d, KExp(k - t_shift));
        Rat mass(0);
        for (uint64_t x = 0; x < d.size(); ++x)
            if (L.contains(x) && fn.get(x)) mass += d.prob(x);
        if (mass > beta) beta = mass;
    }
    auto base = verify_isolator(fn, Rat(5, 8), beta, KExp(k - t_shift), parts_cls);
    REQUIRE(base.ok);

    auto lifted = comm_isolator_bound(base.spec, ell, Rat(t_shift));
    CHECK(lifted.beta == beta + pow2(-(t_shift - ell)));

    // Every cost <= 1 protocol with 1 bit of randomness per side is a mixture
    // of at most 2 parts from the products class; the lifted claim must hold
    // across the whole enumerated protocol class.
    ClassSpec comm_cls;
    comm_cls.model = Model::Comm;
    comm_cls.n_out = 4;
    comm_cls.r_a = comm_cls.r_b = 1;
    comm_cls.n_a = comm_cls.n_b = 2;
    comm_cls.c = 1;
    comm_cls.c_upto = true;
    auto confirm = verify_isolator(fn, lifted.alpha, lifted.beta, lifted.k, comm_cls);
    CHECK(confirm.ok);
}

TEST_CASE("comm mixture lift holds on sampled cost-1 protocols with 3-bit sides") {
    // Same pipeline one size up (exhaustive would be 134M protocols): verify
    // the parts class exhaustively, then spot the lifted claim on a seeded
    // sample of protocols.
    std::vector<uint8_t> vals(64);
    for (uint64_t w = 0; w < 64; ++w) vals[w] = ip_hash(w & 7, w >> 3, 3, 1) == 0;
    BoolFnTable fn = BoolFnTable::from_values(6, vals);
    Rat alpha(static_cast<unsigned long>(fn.ones()), 64);
    alpha.canonicalize();

    std::vector<ExactDist> sides;
    for (uint64_t a = 0; a < 8; ++a) sides.push_back(ExactDist::point_mass(3, a));
    for (uint64_t a = 0; a < 8; ++a)
        for (uint64_t b = a + 1; b < 8; ++b) sides.push_back(flat_dist(3, {a, b}));
    std::vector<ExactDist> products;
    for (const auto& pa : sides)
        for (const auto& pb : sides) products.push_back(dist::product(pa, pb));

    const int k = 6, t_shift = 3, ell = 1;
    Rat beta(0);
    for (const auto& d : products) {
        auto L = dist::light_set(d, KExp(k - t_shift));
        Rat mass(0);
        for (uint64_t x = 0; x < d.size(); ++x)
            if (L.contains(x) && fn.get(x)) mass += d.prob(x);
        if (mass > beta) beta = mass;
    }
    auto base = verify_isolator(fn, alpha, beta, KExp(k - t_shift), explicit_class(products));
    REQUIRE(base.ok);
    auto lifted = comm_isolator_bound(base.spec, ell, Rat(t_shift));

    ClassSpec comm_cls;
    comm_cls.model = Model::Comm;
    comm_cls.n_out = 6;
    comm_cls.r_a = comm_cls.r_b = 1;
    comm_cls.n_a = comm_cls.n_b = 3;
    comm_cls.c = 1;
    comm_cls.mode = EnumMode::RandomSample;
    comm_cls.sample_count = 2000;
    comm_cls.seed = 606;
    auto confirm = verify_isolator(fn, lifted.alpha, lifted.beta, lifted.k, comm_cls);
    CHECK(confirm.ok);
    CHECK(confirm.spec.verified == Verified::Sampled);
}

TEST_CASE("flat robustness check: exhaustive branches and sampled oracle") {
    Rng rng(808);
    MultiOutFnTable ext = random_table(rng, 4, 1);
    auto rep = flat_robustness_check(ext, 2, flat_extractor_error(ext, 2), 1, 16, 0, 0);
    CHECK(rep.ok);
    CHECK(rep.checked == 65535);
    CHECK(rep.small_support_cases > 0);
    CHECK(rep.high_entropy_cases > 0);

    // Sampled mode agrees with a direct measurement.
    auto sampled = flat_robustness_check(ext, 2, Rat(1, 2), 1, 16, 200, 99);
    CHECK(sampled.ok);
    CHECK(sampled.checked == 200);
}

TEST_CASE("flat extractor error closed cases") {
    // Constant extractor: TV to uniform is exactly 1/2 for m = 1.
    MultiOutFnTable constant(3, 1, std::vector<uint32_t>(8, 0));
    CHECK(flat_extractor_error(constant, 1) == Rat(1, 2));
    // Balanced bit: zero error on the full support, positive on halves.
    std::vector<uint32_t> bal(8);
    for (uint64_t x = 0; x < 8; ++x) bal[x] = x & 1;
    MultiOutFnTable ext(3, 1, bal);
    CHECK(flat_extractor_error(ext, 3) == 0);
    CHECK(flat_extractor_error(ext, 1) == Rat(1, 2));
}

TEST_CASE("isolator fixture JSON round trip") {
    BoolFnTable fn = table_of(3, {0, 3, 5});
    ClassSpec cls = degree1_class(3, 3, false);
    IsolatorSpec spec(fn, Rat(3, 8), Rat(1, 2), KExp(1), cls);
    spec.verified = Verified::Exhaustive;
    auto j = io::isolator_to_json(spec);
    auto back = io::isolator_from_json(j);
    CHECK(back.fn.bits == fn.bits);
    CHECK(back.alpha == spec.alpha);
    CHECK(back.beta == spec.beta);
    CHECK(back.k.k == spec.k.k);
    CHECK(back.verified == Verified::Exhaustive);
    CHECK(io::isolator_to_json(back) == j);
}
