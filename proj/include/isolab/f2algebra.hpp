#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isolab/rational.hpp"

namespace isolab::f2 {

// Bit convention used across the project: a string s_1 s_2 ... s_n (leftmost
// position first) is encoded as the word with bit (i-1) = s_i. So "10" is the
// word 0b01 = 1 and "01" is 0b10 = 2.

struct BitVec {
    uint64_t bits = 0;
    int len = 0;

    BitVec() = default;
    BitVec(uint64_t b, int l);

    bool get(int pos) const { return (bits >> pos) & 1; }  // pos is 0-based
    std::string to_string() const;
    static BitVec from_string(const std::string& s);

    bool operator==(const BitVec&) const = default;
};

class BitMatrix {
  public:
    // rows x cols over GF(2), cols <= 64. Row-major; row i stored as a word.
    BitMatrix(int rows, int cols, std::vector<uint64_t> row_words);
    static BitMatrix identity(int n);
    static BitMatrix zero(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int rank() const { return rank_; }
    bool get(int r, int c) const { return (rows_words_[r] >> c) & 1; }
    uint64_t row(int r) const { return rows_words_[r]; }

    // y = A x  (x has cols() bits, result has rows() bits)
    uint64_t apply(uint64_t x) const;

    bool operator==(const BitMatrix&) const = default;

  private:
    int rows_;
    int cols_;
    int rank_;
    std::vector<uint64_t> rows_words_;
};

// Multilinear polynomial over GF(2) in algebraic normal form. A monomial is
// the set of variable indices it multiplies, packed as a word; the empty set
// is the constant-1 term. Monomials are kept sorted and duplicate-free.
struct F2Poly {
    int n_vars = 0;
    std::vector<uint64_t> monomials;

    F2Poly() = default;
    F2Poly(int nv, std::vector<uint64_t> monos);

    static F2Poly zero(int nv) { return F2Poly(nv, {}); }
    static F2Poly one(int nv) { return F2Poly(nv, {0}); }
    static F2Poly variable(int nv, int idx);

    int degree() const;
    bool is_zero() const { return monomials.empty(); }
    bool operator==(const F2Poly&) const = default;
};

struct F2PolyMap {
    int n_inputs = 0;
    int degree_bound = 0;
    std::vector<F2Poly> outputs;

    F2PolyMap() = default;
    F2PolyMap(int r, int deg_bound, std::vector<F2Poly> outs);

    int n_outputs() const { return static_cast<int>(outputs.size()); }
    int degree() const;
    bool operator==(const F2PolyMap&) const = default;
};

int eval_poly(const F2Poly& p, BitVec x);
// Word-level evaluation of a whole map: input bits in x, output bits packed.
uint64_t eval_map(const F2PolyMap& f, uint64_t x);

// h with h(x) = f(Ax + b); degree never increases. A is f.n_inputs x l,
// b has f.n_inputs bits. The substitution is symbolic with x^2 = x applied
// during expansion.
F2PolyMap affine_substitute(const F2PolyMap& f, const BitMatrix& A, BitVec b);

// --- GF(2^w) -----------------------------------------------------------

// Irreducible moduli for GF(2^w), 1 <= w <= 32, from the standard table of
// low-weight binary irreducible polynomials (trinomials/pentanomials,
// x^w + x^a + ... + 1 with smallest exponents). Entry w includes the x^w bit,
// e.g. w=3 -> 0b1011 = x^3 + x + 1. modulus_id() names the table version.
uint64_t gf2w_modulus(int w);
std::string gf2w_modulus_id();

struct GF2wElem {
    int w = 1;
    uint32_t value = 0;

    GF2wElem() = default;
    GF2wElem(int width, uint32_t v);
    bool operator==(const GF2wElem&) const = default;
};

GF2wElem gf2w_add(GF2wElem a, GF2wElem b);
GF2wElem gf2w_mul(GF2wElem a, GF2wElem b);

// Raw-word versions used in hot loops; a, b < 2^w.
uint32_t gf2w_mul_raw(int w, uint32_t a, uint32_t b);

}  // namespace isolab::f2
