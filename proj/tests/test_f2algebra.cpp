#include "doctest.h"

#include <bit>
#include <vector>

#include "isolab/f2algebra.hpp"
#include "isolab/rng.hpp"

using namespace isolab;
using namespace isolab::f2;

namespace {

// Reference GF(2^w) multiply: schoolbook convolution over int arrays, then
// long division by the modulus. Shares no code with the shift-xor path.
uint32_t ref_gf2w_mul(int w, uint32_t a, uint32_t b) {
    std::vector<int> prod(2 * static_cast<size_t>(w), 0);
    for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j)
            if (((a >> i) & 1) && ((b >> j) & 1)) prod[static_cast<size_t>(i + j)] ^= 1;
    std::vector<int> mod(static_cast<size_t>(w) + 1, 0);
    uint64_t mbits = gf2w_modulus(w);
    for (int i = 0; i <= w; ++i) mod[static_cast<size_t>(i)] = (mbits >> i) & 1;
    for (int deg = 2 * w - 2; deg >= w; --deg) {
        if (!prod[static_cast<size_t>(deg)]) continue;
        for (int i = 0; i <= w; ++i) prod[static_cast<size_t>(deg - w + i)] ^= mod[static_cast<size_t>(i)];
    }
    uint32_t out = 0;
    for (int i = 0; i < w; ++i)
        if (prod[static_cast<size_t>(i)]) out |= uint32_t{1} << i;
    return out;
}

F2PolyMap random_map(Rng& rng, int r, int n, int d) {
    std::vector<F2Poly> outs;
    for (int i = 0; i < n; ++i) {
        std::vector<uint64_t> monos;
        for (uint64_t m = 0; m < (uint64_t{1} << r); ++m)
            if (std::popcount(m) <= d && rng.coin()) monos.push_back(m);
        outs.emplace_back(r, std::move(monos));
    }
    return F2PolyMap(r, d, std::move(outs));
}

}  // namespace

TEST_CASE("bit string encoding: leftmost position is bit 0") {
    CHECK(BitVec::from_string("10").bits == 1);
    CHECK(BitVec::from_string("01").bits == 2);
    CHECK(BitVec(1, 2).to_string() == "10");
    CHECK_THROWS_AS(BitVec::from_string("10x"), ValidationError);
}

TEST_CASE("eval_poly basics") {
    F2Poly p1 = F2Poly::variable(2, 0);  // x1
    CHECK(eval_poly(p1, BitVec::from_string("10")) == 1);
    CHECK(eval_poly(p1, BitVec::from_string("01")) == 0);

    F2Poly p2(2, {0, 0b11});  // 1 + x1 x2
    CHECK(eval_poly(p2, BitVec::from_string("11")) == 0);
    CHECK(eval_poly(p2, BitVec::from_string("10")) == 1);

    CHECK_THROWS_AS(eval_poly(p1, BitVec::from_string("101")), ValidationError);
}

TEST_CASE("x1 + x2 + x1x2 is OR") {
    F2Poly p(2, {0b01, 0b10, 0b11});
    for (uint64_t x = 0; x < 4; ++x) {
        int want = (x != 0) ? 1 : 0;  // truth-table enumeration oracle
        CHECK(eval_poly(p, BitVec(x, 2)) == want);
    }
}

TEST_CASE("F2Poly rejects duplicates and bad indices") {
    CHECK_THROWS_AS(F2Poly(2, {1, 1}), ValidationError);
    CHECK_THROWS_AS(F2Poly(2, {0b100}), ValidationError);
    CHECK(F2Poly(3, {0b101, 0b1}).degree() == 2);
}

TEST_CASE("affine_substitute identity") {
    Rng rng(7);
    F2PolyMap f = random_map(rng, 3, 2, 2);
    F2PolyMap h = affine_substitute(f, BitMatrix::identity(3), BitVec(0, 3));
    CHECK(h == f);
}

TEST_CASE("affine_substitute squares collapse: x1 x2 at (u, u) is u") {
    F2PolyMap f(2, 2, {F2Poly(2, {0b11})});
    BitMatrix A(2, 1, {1, 1});
    F2PolyMap h = affine_substitute(f, A, BitVec(0, 2));
    CHECK(h.outputs[0] == F2Poly(1, {0b1}));
}

TEST_CASE("affine_substitute pointwise equality, exhaustive") {
    Rng rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        int r = 2 + static_cast<int>(rng.below(3));  // f inputs
        int l = 1 + static_cast<int>(rng.below(8));  // substituted inputs, up to 8
        F2PolyMap f = random_map(rng, r, 2, 2);
        std::vector<uint64_t> rows(static_cast<size_t>(r));
        for (auto& row : rows) row = rng.bits(l);
        BitMatrix A(r, l, rows);
        BitVec b(rng.bits(r), r);
        F2PolyMap h = affine_substitute(f, A, b);
        CHECK(h.n_inputs == l);
        for (uint64_t x = 0; x < (uint64_t{1} << l); ++x) {
            uint64_t inner = A.apply(x) ^ b.bits;
            CHECK(eval_map(h, x) == eval_map(f, inner));
        }
    }
}

TEST_CASE("affine_substitute never increases degree") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        int r = 2 + static_cast<int>(rng.below(5));  // up to 6 inputs
        int d = 1 + static_cast<int>(rng.below(3));
        int l = 1 + static_cast<int>(rng.below(5));
        F2PolyMap f = random_map(rng, r, 2, d);
        std::vector<uint64_t> rows(static_cast<size_t>(r));
        for (auto& row : rows) row = rng.bits(l);
        F2PolyMap h = affine_substitute(f, BitMatrix(r, l, rows), BitVec(rng.bits(r), r));
        CHECK(h.degree() <= f.degree());
    }
}

TEST_CASE("affine_substitute dimension mismatch") {
    F2PolyMap f(2, 1, {F2Poly::variable(2, 0)});
    CHECK_THROWS_AS(affine_substitute(f, BitMatrix::identity(3), BitVec(0, 3)), ValidationError);
}

TEST_CASE("BitMatrix rank") {
    CHECK(BitMatrix::identity(4).rank() == 4);
    CHECK(BitMatrix::zero(3, 3).rank() == 0);
    CHECK(BitMatrix(3, 2, {0b01, 0b10, 0b11}).rank() == 2);
}

TEST_CASE("gf2w examples") {
    GF2wElem one(3, 1), zero(3, 0), a(3, 0b101);
    CHECK(gf2w_mul(a, one) == a);
    CHECK(gf2w_mul(a, zero) == zero);
    // w=3, modulus x^3+x+1: x * x^2 = x^3 = x + 1
    CHECK(gf2w_mul(GF2wElem(3, 0b010), GF2wElem(3, 0b100)).value == 0b011);
    CHECK_THROWS_AS(gf2w_mul(GF2wElem(3, 1), GF2wElem(4, 1)), ValidationError);
}

TEST_CASE("gf2w agrees with the reference multiplier") {
    for (int w = 1; w <= 5; ++w)
        for (uint32_t a = 0; a < (uint32_t{1} << w); ++a)
            for (uint32_t b = 0; b < (uint32_t{1} << w); ++b)
                CHECK(gf2w_mul_raw(w, a, b) == ref_gf2w_mul(w, a, b));
    Rng rng(5);
    for (int w : {8, 12, 16, 24, 32}) {
        for (int trial = 0; trial < 200; ++trial) {
            uint32_t a = static_cast<uint32_t>(rng.bits(w));
            uint32_t b = static_cast<uint32_t>(rng.bits(w));
            CHECK(gf2w_mul_raw(w, a, b) == ref_gf2w_mul(w, a, b));
        }
    }
}

TEST_CASE("gf2w nonzero elements form an abelian group, w <= 8") {
    for (int w = 1; w <= 8; ++w) {
        const uint32_t size = uint32_t{1} << w;
        uint64_t closure_bad = 0, inverse_missing = 0, comm_bad = 0, assoc_bad = 0;
        for (uint32_t a = 1; a < size; ++a) {
            bool has_inverse = false;
            for (uint32_t b = 1; b < size; ++b) {
                uint32_t ab = gf2w_mul_raw(w, a, b);
                if (ab == 0) ++closure_bad;
                if (ab == 1) has_inverse = true;
                if (ab != gf2w_mul_raw(w, b, a)) ++comm_bad;
            }
            if (!has_inverse) ++inverse_missing;
        }
        for (uint32_t a = 1; a < size; ++a)
            for (uint32_t b = 1; b < size; ++b) {
                uint32_t ab = gf2w_mul_raw(w, a, b);
                for (uint32_t c = 1; c < size; ++c)
                    if (gf2w_mul_raw(w, ab, c) != gf2w_mul_raw(w, a, gf2w_mul_raw(w, b, c))) ++assoc_bad;
            }
        CAPTURE(w);
        CHECK(closure_bad == 0);
        CHECK(inverse_missing == 0);
        CHECK(comm_bad == 0);
        CHECK(assoc_bad == 0);
    }
}

TEST_CASE("gf2w distributes over xor") {
    Rng rng(11);
    for (int w : {3, 5, 8, 16}) {
        for (int trial = 0; trial < 100; ++trial) {
            uint32_t a = static_cast<uint32_t>(rng.bits(w));
            uint32_t b = static_cast<uint32_t>(rng.bits(w));
            uint32_t c = static_cast<uint32_t>(rng.bits(w));
            CHECK(gf2w_mul_raw(w, a, b ^ c) == (gf2w_mul_raw(w, a, b) ^ gf2w_mul_raw(w, a, c)));
        }
    }
}

TEST_CASE("modulus table sanity") {
    for (int w = 1; w <= 32; ++w) {
        uint64_t m = gf2w_modulus(w);
        CHECK(((m >> w) & 1) == 1);  // monic of degree w
        CHECK((m & 1) == 1);         // nonzero constant term
        CHECK((m >> (w + 1)) == 0);
    }
    CHECK_THROWS_AS(gf2w_modulus(0), ValidationError);
    CHECK_THROWS_AS(gf2w_modulus(33), ValidationError);
}
