#include "isolab/f2algebra.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace isolab::f2 {

BitVec::BitVec(uint64_t b, int l) : bits(b), len(l) {
    if (l < 0 || l > 64) throw ValidationError("BitVec length out of range");
    if (l < 64) bits &= (uint64_t{1} << l) - 1;
}

std::string BitVec::to_string() const {
    std::string s(static_cast<size_t>(len), '0');
    for (int i = 0; i < len; ++i)
        if (get(i)) s[static_cast<size_t>(i)] = '1';
    return s;
}

BitVec BitVec::from_string(const std::string& s) {
    if (s.empty() || s.size() > 64) throw ValidationError("bit string length out of range");
    uint64_t w = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1')
            w |= uint64_t{1} << i;
        else if (s[i] != '0')
            throw ValidationError("bit string must contain only 0/1");
    }
    return BitVec(w, static_cast<int>(s.size()));
}

BitMatrix::BitMatrix(int rows, int cols, std::vector<uint64_t> row_words)
    : rows_(rows), cols_(cols), rows_words_(std::move(row_words)) {
    if (rows <= 0 || cols <= 0 || cols > 64) throw ValidationError("BitMatrix dimensions out of range");
    if (rows_words_.size() != static_cast<size_t>(rows)) throw ValidationError("BitMatrix row count mismatch");
    uint64_t mask = cols == 64 ? ~uint64_t{0} : (uint64_t{1} << cols) - 1;
    for (auto& r : rows_words_) r &= mask;
    // Gaussian elimination over a scratch copy; rank is cached once since
    // the matrix is immutable.
    std::vector<uint64_t> m = rows_words_;
    int rank = 0;
    for (int c = 0; c < cols && rank < rows; ++c) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if ((m[static_cast<size_t>(r)] >> c) & 1) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        std::swap(m[static_cast<size_t>(pivot)], m[static_cast<size_t>(rank)]);
        for (int r = 0; r < rows; ++r)
            if (r != rank && ((m[static_cast<size_t>(r)] >> c) & 1)) m[static_cast<size_t>(r)] ^= m[static_cast<size_t>(rank)];
        ++rank;
    }
    rank_ = rank;
}

BitMatrix BitMatrix::identity(int n) {
    std::vector<uint64_t> rows(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<size_t>(i)] = uint64_t{1} << i;
    return BitMatrix(n, n, std::move(rows));
}

BitMatrix BitMatrix::zero(int rows, int cols) {
    return BitMatrix(rows, cols, std::vector<uint64_t>(static_cast<size_t>(rows), 0));
}

uint64_t BitMatrix::apply(uint64_t x) const {
    uint64_t y = 0;
    for (int i = 0; i < rows_; ++i) {
        uint64_t dot = rows_words_[static_cast<size_t>(i)] & x;
        y |= static_cast<uint64_t>(std::popcount(dot) & 1) << i;
    }
    return y;
}

F2Poly::F2Poly(int nv, std::vector<uint64_t> monos) : n_vars(nv), monomials(std::move(monos)) {
    if (nv < 0 || nv > 64) throw ValidationError("F2Poly variable count out of range");
    std::sort(monomials.begin(), monomials.end());
    if (std::adjacent_find(monomials.begin(), monomials.end()) != monomials.end())
        throw ValidationError("duplicate monomial in ANF");
    uint64_t var_mask = nv == 64 ? ~uint64_t{0} : (uint64_t{1} << nv) - 1;
    for (uint64_t m : monomials)
        if (m & ~var_mask) throw ValidationError("monomial references variable >= n_vars");
}

F2Poly F2Poly::variable(int nv, int idx) {
    if (idx < 0 || idx >= nv) throw ValidationError("variable index out of range");
    return F2Poly(nv, {uint64_t{1} << idx});
}

int F2Poly::degree() const {
    int d = 0;
    for (uint64_t m : monomials) d = std::max(d, std::popcount(m));
    return d;
}

F2PolyMap::F2PolyMap(int r, int deg_bound, std::vector<F2Poly> outs)
    : n_inputs(r), degree_bound(deg_bound), outputs(std::move(outs)) {
    if (r < 0 || r > 64) throw ValidationError("F2PolyMap input count out of range");
    for (const auto& p : outputs) {
        if (p.n_vars != r) throw ValidationError("output polynomial input-count mismatch");
        if (p.degree() > deg_bound) throw ValidationError("output polynomial exceeds degree bound");
    }
}

int F2PolyMap::degree() const {
    int d = 0;
    for (const auto& p : outputs) d = std::max(d, p.degree());
    return d;
}

int eval_poly(const F2Poly& p, BitVec x) {
    if (x.len != p.n_vars) throw ValidationError("eval_poly dimension mismatch");
    int acc = 0;
    for (uint64_t m : p.monomials) acc ^= static_cast<int>((x.bits & m) == m);
    return acc;
}

uint64_t eval_map(const F2PolyMap& f, uint64_t x) {
    uint64_t y = 0;
    for (size_t i = 0; i < f.outputs.size(); ++i) {
        uint64_t bit = 0;
        for (uint64_t m : f.outputs[i].monomials) bit ^= static_cast<uint64_t>((x & m) == m);
        y |= bit << i;
    }
    return y;
}

namespace {

// XOR-toggle a monomial into a term set (ANF addition).
void toggle(std::unordered_set<uint64_t>& set, uint64_t mono) {
    auto it = set.find(mono);
    if (it != set.end())
        set.erase(it);
    else
        set.insert(mono);
}

}  // namespace

F2PolyMap affine_substitute(const F2PolyMap& f, const BitMatrix& A, BitVec b) {
    if (A.rows() != f.n_inputs || b.len != f.n_inputs)
        throw ValidationError("affine_substitute dimension mismatch");
    const int l = A.cols();

    std::vector<F2Poly> outs;
    outs.reserve(f.outputs.size());
    std::unordered_set<uint64_t> result;
    std::vector<uint64_t> cur, next;
    for (const auto& p : f.outputs) {
        result.clear();
        for (uint64_t mono : p.monomials) {
            // Product over j in mono of (sum_{i in row_j(A)} u_i + b_j),
            // expanded multilinearly: union of index sets absorbs squares.
            cur.assign(1, 0);
            uint64_t rest = mono;
            while (rest) {
                int j = std::countr_zero(rest);
                rest &= rest - 1;
                uint64_t row = A.row(j);
                bool cbit = b.get(j);
                next.clear();
                for (uint64_t t : cur) {
                    uint64_t vars = row;
                    while (vars) {
                        int i = std::countr_zero(vars);
                        vars &= vars - 1;
                        next.push_back(t | (uint64_t{1} << i));
                    }
                    if (cbit) next.push_back(t);
                }
                // Cancel duplicate terms mod 2.
                std::sort(next.begin(), next.end());
                cur.clear();
                size_t i = 0;
                while (i < next.size()) {
                    size_t j2 = i;
                    while (j2 < next.size() && next[j2] == next[i]) ++j2;
                    if ((j2 - i) & 1) cur.push_back(next[i]);
                    i = j2;
                }
            }
            for (uint64_t t : cur) toggle(result, t);
        }
        std::vector<uint64_t> monos(result.begin(), result.end());
        outs.emplace_back(l, std::move(monos));
    }
    return F2PolyMap(l, f.degree_bound, std::move(outs));
}

namespace {

// x^w + (low-order part); entry w of the low-weight irreducible table.
constexpr uint64_t kModuli[33] = {
    0,
    0x3,        // w=1:  x + 1
    0x7,        // w=2:  x^2 + x + 1
    0xB,        // w=3:  x^3 + x + 1
    0x13,       // w=4:  x^4 + x + 1
    0x25,       // w=5:  x^5 + x^2 + 1
    0x43,       // w=6:  x^6 + x + 1
    0x83,       // w=7:  x^7 + x + 1
    0x11B,      // w=8:  x^8 + x^4 + x^3 + x + 1
    0x203,      // w=9:  x^9 + x + 1
    0x409,      // w=10: x^10 + x^3 + 1
    0x805,      // w=11: x^11 + x^2 + 1
    0x1009,     // w=12: x^12 + x^3 + 1
    0x201B,     // w=13: x^13 + x^4 + x^3 + x + 1
    0x4021,     // w=14: x^14 + x^5 + 1
    0x8003,     // w=15: x^15 + x + 1
    0x1002B,    // w=16: x^16 + x^5 + x^3 + x + 1
    0x20009,    // w=17: x^17 + x^3 + 1
    0x40009,    // w=18: x^18 + x^3 + 1
    0x80027,    // w=19: x^19 + x^5 + x^2 + x + 1
    0x100009,   // w=20: x^20 + x^3 + 1
    0x200005,   // w=21: x^21 + x^2 + 1
    0x400003,   // w=22: x^22 + x + 1
    0x800021,   // w=23: x^23 + x^5 + 1
    0x100001B,  // w=24: x^24 + x^4 + x^3 + x + 1
    0x2000009,  // w=25: x^25 + x^3 + 1
    0x400001B,  // w=26: x^26 + x^4 + x^3 + x + 1
    0x8000027,  // w=27: x^27 + x^5 + x^2 + x + 1
    0x10000003, // w=28: x^28 + x + 1
    0x20000005, // w=29: x^29 + x^2 + 1
    0x40000003, // w=30: x^30 + x + 1
    0x80000009, // w=31: x^31 + x^3 + 1
    0x10000008D,// w=32: x^32 + x^7 + x^3 + x^2 + 1
};

}  // namespace

uint64_t gf2w_modulus(int w) {
    if (w < 1 || w > 32) throw ValidationError("GF(2^w) width out of range");
    return kModuli[w];
}

std::string gf2w_modulus_id() { return "lowweight-v1"; }

GF2wElem::GF2wElem(int width, uint32_t v) : w(width), value(v) {
    if (width < 1 || width > 32) throw ValidationError("GF(2^w) width out of range");
    if (width < 32 && (v >> width)) throw ValidationError("GF(2^w) value out of range");
}

GF2wElem gf2w_add(GF2wElem a, GF2wElem b) {
    if (a.w != b.w) throw ValidationError("GF(2^w) field mismatch");
    return GF2wElem(a.w, a.value ^ b.value);
}

uint32_t gf2w_mul_raw(int w, uint32_t a, uint32_t b) {
    // Carry-less multiply into 64 bits, then reduce from the top.
    uint64_t prod = 0;
    uint64_t aa = a;
    uint32_t bb = b;
    while (bb) {
        if (bb & 1) prod ^= aa;
        aa <<= 1;
        bb >>= 1;
    }
    const uint64_t mod = kModuli[w];
    for (int bit = 62; bit >= w; --bit)
        if ((prod >> bit) & 1) prod ^= mod << (bit - w);
    return static_cast<uint32_t>(prod);
}

GF2wElem gf2w_mul(GF2wElem a, GF2wElem b) {
    if (a.w != b.w) throw ValidationError("GF(2^w) field mismatch");
    return GF2wElem(a.w, gf2w_mul_raw(a.w, a.value, b.value));
}

}  // namespace isolab::f2
