#include "isolab/sources.hpp"

#include <algorithm>
#include <bit>

namespace isolab::sources {

using f2::F2Poly;

namespace {

int ceil_log2_u(uint64_t v) {
    int b = 0;
    while ((uint64_t{1} << b) < v) ++b;
    return b;
}

std::vector<uint64_t> monomial_masks(int r, int d) {
    std::vector<uint64_t> out;
    for (uint64_t m = 0; m < (uint64_t{1} << r); ++m)
        if (std::popcount(m) <= d) out.push_back(m);
    return out;
}

std::vector<uint64_t> support_masks(int r, int k) {
    std::vector<uint64_t> out;
    for (uint64_t m = 0; m < (uint64_t{1} << r); ++m)
        if (std::popcount(m) == k) out.push_back(m);
    return out;
}

Int pow2_int(uint64_t e) {
    Int v = 1;
    mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), e);
    return v;
}

}  // namespace

LocalSource::LocalSource(F2PolyMap m, int loc) : map(std::move(m)), locality(loc) {
    if (loc < 1) throw ValidationError("locality must be positive");
    for (const auto& p : map.outputs) {
        uint64_t vars = 0;
        for (uint64_t mono : p.monomials) vars |= mono;
        if (std::popcount(vars) > loc) throw ValidationError("output exceeds locality bound");
    }
}

RobpSpec::RobpSpec(int s_bound, std::vector<int> w, std::vector<int> lens,
                   std::vector<std::vector<std::array<Edge, 2>>> e)
    : s(s_bound), widths(std::move(w)), label_lens(std::move(lens)), edges(std::move(e)) {
    if (widths.empty() || widths[0] != 1) throw ValidationError("ROBP needs a single start vertex");
    if (label_lens.size() + 1 != widths.size()) throw ValidationError("ROBP layer/label shape mismatch");
    if (label_lens.empty()) throw ValidationError("ROBP needs at least one step");
    if (edges.size() != label_lens.size()) throw ValidationError("ROBP edge layer count mismatch");
    output_bits = 0;
    for (size_t l = 0; l < label_lens.size(); ++l) {
        if (label_lens[l] < 0) throw ValidationError("negative label length");
        output_bits += label_lens[l];
        if (widths[l + 1] < 1 || widths[l + 1] > (1 << s)) throw ValidationError("ROBP width exceeds 2^s");
        if (edges[l].size() != static_cast<size_t>(widths[l])) throw ValidationError("ROBP edge vertex count mismatch");
        uint64_t label_cap = uint64_t{1} << label_lens[l];
        for (const auto& pair : edges[l])
            for (const auto& edge : pair) {
                if (edge.target < 0 || edge.target >= widths[l + 1])
                    throw ValidationError("ROBP edge targets outside next layer");
                if (label_lens[l] < 64 && edge.label >= label_cap)
                    throw ValidationError("ROBP label longer than layer length");
            }
    }
    if (output_bits < 1) throw ValidationError("ROBP emits no output bits");
}

CommSpec::CommSpec(int ra, int rb, int na, int nb, int c, std::vector<Node> ns,
                   std::vector<std::vector<uint64_t>> aout, std::vector<std::vector<uint64_t>> bout)
    : r_a_bits(ra), r_b_bits(rb), n_a(na), n_b(nb), cost(c),
      nodes(std::move(ns)), alice_out(std::move(aout)), bob_out(std::move(bout)) {
    if (ra < 0 || rb < 0 || ra + rb > 24) throw ValidationError("comm randomness width out of range");
    if (na < 1 || nb < 1) throw ValidationError("comm outputs must be nonempty");
    if (c < 0 || c > 20) throw ValidationError("comm cost out of range");
    uint64_t n_nodes = (uint64_t{1} << c) - 1;
    uint64_t n_leaves = uint64_t{1} << c;
    if (nodes.size() != n_nodes) throw ValidationError("comm node count mismatch");
    for (const auto& nd : nodes) {
        if (nd.speaker != 0 && nd.speaker != 1) throw ValidationError("comm speaker must be 0 or 1");
        size_t want = size_t{1} << (nd.speaker == 0 ? ra : rb);
        if (nd.send.size() != want) throw ValidationError("comm send table size mismatch");
    }
    if (alice_out.size() != n_leaves || bob_out.size() != n_leaves)
        throw ValidationError("comm output table leaf count mismatch");
    for (const auto& row : alice_out)
        if (row.size() != (size_t{1} << ra)) throw ValidationError("comm alice output table size mismatch");
    for (const auto& row : bob_out)
        if (row.size() != (size_t{1} << rb)) throw ValidationError("comm bob output table size mismatch");
}

int SourceSpec::output_bits() const {
    return std::visit(
        [](const auto& b) -> int {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PolySource>)
                return b.map.n_outputs();
            else if constexpr (std::is_same_v<T, LocalSource>)
                return b.map.n_outputs();
            else if constexpr (std::is_same_v<T, RobpSpec>)
                return b.output_bits;
            else if constexpr (std::is_same_v<T, CommSpec>)
                return b.output_bits();
            else
                return b.mixture.parts.front().n();
        },
        body);
}

std::string SourceSpec::model_name() const {
    switch (body.index()) {
        case 0: return "polynomial";
        case 1: return "local";
        case 2: return "robp";
        case 3: return "comm";
        default: return "mixture";
    }
}

bool ClassSpec::same_class(const ClassSpec& other) const {
    return model == other.model && n_out == other.n_out && r == other.r && r_upto == other.r_upto &&
           degree == other.degree && locality == other.locality && s == other.s && c == other.c &&
           c_upto == other.c_upto && r_a == other.r_a && r_b == other.r_b && n_a == other.n_a &&
           n_b == other.n_b && mode == other.mode && sample_count == other.sample_count &&
           seed == other.seed && addr_t == other.addr_t && members == other.members;
}

std::string ClassSpec::describe() const {
    std::string m;
    switch (model) {
        case Model::Polynomial: m = "polynomial(d=" + std::to_string(degree) + ",r" + (r_upto ? "<=" : "=") + std::to_string(r) + ")"; break;
        case Model::Local: m = "local(delta=" + std::to_string(locality) + ",r=" + std::to_string(r) + ")"; break;
        case Model::Robp: m = "robp(s=" + std::to_string(s) + ")"; break;
        case Model::Comm: m = "comm(c" + std::string(c_upto ? "<=" : "=") + std::to_string(c) + ")"; break;
        case Model::Explicit: m = "explicit(" + std::to_string(members.size()) + ")"; break;
    }
    m += ",n=" + std::to_string(n_out);
    switch (mode) {
        case EnumMode::Exhaustive: m += ",exhaustive"; break;
        case EnumMode::AffineImages: m += ",affine-images"; break;
        case EnumMode::RandomSample: m += ",sample(" + std::to_string(sample_count) + ",seed=" + std::to_string(seed) + ")"; break;
    }
    if (addr_t > 0) m = "addr(t=" + std::to_string(addr_t) + ") of " + m;
    return m;
}

ClassEnum::ClassEnum(ClassSpec spec) : spec_(std::move(spec)) {
    const auto& cs = spec_;
    if (cs.n_out < 1) throw ValidationError("class output bits must be positive");
    total_count_ = 0;

    if (cs.mode == EnumMode::RandomSample) {
        if (cs.model == Model::Explicit) throw ValidationError("explicit classes are always exhaustive");
        size_ = cs.sample_count;
        total_count_ = Int(static_cast<unsigned long>(size_));
        return;
    }

    switch (cs.model) {
        case Model::Explicit: {
            for (const auto& m : cs.members)
                if (m.output_bits() != cs.n_out) throw ValidationError("explicit member output-bit mismatch");
            size_ = cs.members.size();
            total_count_ = Int(static_cast<unsigned long>(size_));
            return;
        }
        case Model::Polynomial: {
            if (cs.r < 1) throw ValidationError("polynomial class needs r >= 1");
            if (cs.mode == EnumMode::AffineImages) {
                if (cs.degree != 1) throw ValidationError("affine-images mode needs degree 1");
                if (cs.n_out > 16) throw ValidationError("affine-images mode capped at 16 output bits");
                int max_dim = std::min(cs.r, cs.n_out);
                uint64_t cum = 0;
                for (int dim = 0; dim <= max_dim; ++dim) {
                    // Reduced-row-echelon bases: pivot columns ascending, each
                    // row has free entries only at non-pivot columns after its
                    // pivot. Every subspace appears exactly once.
                    for (uint64_t pivots = 0; pivots < (uint64_t{1} << cs.n_out); ++pivots) {
                        if (std::popcount(pivots) != dim) continue;
                        std::vector<int> piv;
                        for (int i = 0; i < cs.n_out; ++i)
                            if ((pivots >> i) & 1) piv.push_back(i);
                        std::vector<std::pair<int, std::vector<int>>> free_cols(dim);
                        int total_free = 0;
                        for (int i = 0; i < dim; ++i) {
                            for (int c2 = piv[static_cast<size_t>(i)] + 1; c2 < cs.n_out; ++c2)
                                if (!((pivots >> c2) & 1)) free_cols[static_cast<size_t>(i)].second.push_back(c2);
                            total_free += static_cast<int>(free_cols[static_cast<size_t>(i)].second.size());
                        }
                        for (uint64_t fbits = 0; fbits < (uint64_t{1} << total_free); ++fbits) {
                            Span sp;
                            sp.dim = dim;
                            sp.pivots = piv;
                            sp.basis.resize(static_cast<size_t>(dim));
                            int pos = 0;
                            for (int i = 0; i < dim; ++i) {
                                uint64_t row = uint64_t{1} << piv[static_cast<size_t>(i)];
                                for (int c2 : free_cols[static_cast<size_t>(i)].second) {
                                    if ((fbits >> pos) & 1) row |= uint64_t{1} << c2;
                                    ++pos;
                                }
                                sp.basis[static_cast<size_t>(i)] = row;
                            }
                            sp.coset_count = uint64_t{1} << (cs.n_out - dim);
                            cum += sp.coset_count;
                            sp.cum_end = cum;
                            spans_.push_back(std::move(sp));
                            if (cum > cs.budget) throw BudgetError("affine-images stream exceeds budget");
                        }
                    }
                }
                size_ = cum;
                total_count_ = Int(static_cast<unsigned long>(cum));
                return;
            }
            // Raw coefficient enumeration, one block per input width.
            int r_lo = cs.r_upto ? 1 : cs.r;
            Int cum = 0;
            for (int rr = r_lo; rr <= cs.r; ++rr) {
                PolyBlock blk;
                blk.r = rr;
                blk.monomials = monomial_masks(rr, cs.degree);
                blk.count = pow2_int(static_cast<uint64_t>(blk.monomials.size()) * static_cast<uint64_t>(cs.n_out));
                cum += blk.count;
                blk.cum_end = cum;
                poly_blocks_.push_back(std::move(blk));
            }
            total_count_ = cum;
            break;
        }
        case Model::Local: {
            if (cs.r < 1) throw ValidationError("local class needs r >= 1");
            int k = std::min(cs.locality, cs.r);
            int r_lo = cs.r_upto ? std::max(1, k) : cs.r;
            Int cum = 0;
            for (int rr = r_lo; rr <= cs.r; ++rr) {
                PolyBlock blk;
                blk.r = rr;
                blk.monomials = support_masks(rr, std::min(k, rr));
                Int per_out = Int(static_cast<unsigned long>(blk.monomials.size())) *
                              pow2_int(uint64_t{1} << std::min(k, rr));
                Int cnt = 1;
                for (int i = 0; i < cs.n_out; ++i) cnt *= per_out;
                blk.count = cnt;
                cum += blk.count;
                blk.cum_end = cum;
                poly_blocks_.push_back(std::move(blk));
            }
            total_count_ = cum;
            break;
        }
        case Model::Comm: {
            if (cs.r_a < 0 || cs.r_b < 0 || cs.n_a < 1 || cs.n_b < 1)
                throw ValidationError("comm class shape invalid");
            if (cs.r_a > 4 || cs.r_b > 4)
                throw ValidationError("exhaustive comm enumeration capped at 4 randomness bits per side");
            int c_lo = cs.c_upto ? 0 : cs.c;
            Int cum = 0;
            for (int cc = c_lo; cc <= cs.c; ++cc) {
                // Speakers alternate by depth from the starter. The stream for
                // one cost is [starter=0 members][starter=1 members] (cost 0
                // has a single degenerate starter).
                CommBlock blk;
                blk.cost = cc;
                uint64_t leaves = uint64_t{1} << cc;
                Int out_factor = pow2_int(static_cast<uint64_t>(cs.n_a) * leaves * (uint64_t{1} << cs.r_a)) *
                                 pow2_int(static_cast<uint64_t>(cs.n_b) * leaves * (uint64_t{1} << cs.r_b));
                Int cnt = 0;
                for (int starter = 0; starter < (cc == 0 ? 1 : 2); ++starter) {
                    Int tree = 1;
                    for (int d = 0; d < cc; ++d) {
                        int spk = (starter + d) & 1;
                        Int per_node = pow2_int(uint64_t{1} << (spk == 0 ? cs.r_a : cs.r_b));
                        for (int nn = 0; nn < (1 << d); ++nn) tree *= per_node;
                    }
                    cnt += tree * out_factor;
                }
                blk.count = cnt;
                cum += cnt;
                blk.cum_end = cum;
                comm_blocks_.push_back(std::move(blk));
            }
            total_count_ = cum;
            break;
        }
        case Model::Robp:
            throw ValidationError("robp classes enumerate via random-sample mode only");
    }

    if (total_count_ > Int(static_cast<unsigned long>(cs.budget)))
        throw BudgetError("exhaustive class size " + total_count_.get_str() + " exceeds budget");
    size_ = static_cast<uint64_t>(mpz_get_ui(total_count_.get_mpz_t()));
}

SourceSpec ClassEnum::poly_at(const Int& idx) const {
    Int local = idx;
    const PolyBlock* blk = nullptr;
    Int prev = 0;
    for (const auto& b : poly_blocks_) {
        if (idx < b.cum_end) {
            blk = &b;
            local = idx - prev;
            break;
        }
        prev = b.cum_end;
    }
    if (!blk) throw ValidationError("class index out of range");
    const size_t B = blk->monomials.size();
    std::vector<F2Poly> outs;
    outs.reserve(static_cast<size_t>(spec_.n_out));
    for (int i = 0; i < spec_.n_out; ++i) {
        std::vector<uint64_t> monos;
        for (size_t j = 0; j < B; ++j) {
            uint64_t bitpos = static_cast<uint64_t>(i) * B + j;
            if (mpz_tstbit(local.get_mpz_t(), bitpos)) monos.push_back(blk->monomials[j]);
        }
        outs.emplace_back(blk->r, std::move(monos));
    }
    return SourceSpec{PolySource{F2PolyMap(blk->r, spec_.degree, std::move(outs))}};
}

SourceSpec ClassEnum::local_at(const Int& idx) const {
    Int local = idx;
    const PolyBlock* blk = nullptr;
    Int prev = 0;
    for (const auto& b : poly_blocks_) {
        if (idx < b.cum_end) {
            blk = &b;
            local = idx - prev;
            break;
        }
        prev = b.cum_end;
    }
    if (!blk) throw ValidationError("class index out of range");
    int k = std::min(std::min(spec_.locality, spec_.r), blk->r);
    uint64_t table_words = uint64_t{1} << (uint64_t{1} << k);
    Int per_out = Int(static_cast<unsigned long>(blk->monomials.size())) * Int(static_cast<unsigned long>(table_words));
    std::vector<F2Poly> outs;
    outs.reserve(static_cast<size_t>(spec_.n_out));
    Int rem = local;
    for (int i = 0; i < spec_.n_out; ++i) {
        Int digit = rem % per_out;
        rem /= per_out;
        uint64_t dig = mpz_get_ui(digit.get_mpz_t());
        uint64_t support_idx = dig / table_words;
        uint64_t table_bits = dig % table_words;
        uint64_t support_mask = blk->monomials[support_idx];
        std::vector<int> support;
        for (int v = 0; v < blk->r; ++v)
            if ((support_mask >> v) & 1) support.push_back(v);
        std::vector<uint8_t> table(size_t{1} << k);
        for (size_t t = 0; t < table.size(); ++t) table[t] = (table_bits >> t) & 1;
        outs.push_back(table_to_anf(blk->r, support, table));
    }
    return SourceSpec{LocalSource{F2PolyMap(blk->r, std::min(spec_.locality, blk->r), std::move(outs)), spec_.locality}};
}

SourceSpec ClassEnum::comm_at(const Int& idx) const {
    Int local = idx;
    const CommBlock* blk = nullptr;
    Int prev = 0;
    for (const auto& b : comm_blocks_) {
        if (idx < b.cum_end) {
            blk = &b;
            local = idx - prev;
            break;
        }
        prev = b.cum_end;
    }
    if (!blk) throw ValidationError("class index out of range");
    const int cc = blk->cost;
    // Resolve the starter sub-block (tree sizes differ when r_a != r_b).
    uint64_t leaves_cnt = uint64_t{1} << cc;
    Int out_factor = pow2_int(static_cast<uint64_t>(spec_.n_a) * leaves_cnt * (uint64_t{1} << spec_.r_a)) *
                     pow2_int(static_cast<uint64_t>(spec_.n_b) * leaves_cnt * (uint64_t{1} << spec_.r_b));
    int starter = 0;
    if (cc > 0) {
        Int tree0 = 1;
        for (int d = 0; d < cc; ++d) {
            Int per_node = pow2_int(uint64_t{1} << ((d & 1) == 0 ? spec_.r_a : spec_.r_b));
            for (int nn = 0; nn < (1 << d); ++nn) tree0 *= per_node;
        }
        Int block0 = tree0 * out_factor;
        if (local >= block0) {
            starter = 1;
            local -= block0;
        }
    }
    // Digit decoding; integer fast path when the block index fits a word.
    Int rem_big = local;
    uint64_t rem_small = 0;
    const bool small = mpz_fits_ulong_p(local.get_mpz_t());
    if (small) rem_small = mpz_get_ui(local.get_mpz_t());
    auto take = [&](uint64_t base) -> uint64_t {
        if (small) {
            uint64_t digit = rem_small % base;
            rem_small /= base;
            return digit;
        }
        Int digit = rem_big % Int(static_cast<unsigned long>(base));
        rem_big /= Int(static_cast<unsigned long>(base));
        return mpz_get_ui(digit.get_mpz_t());
    };
    std::vector<CommSpec::Node> nodes(( size_t{1} << cc) - 1);
    for (int d = 0; d < cc; ++d) {
        int spk = (starter + d) & 1;
        int rbits = spk == 0 ? spec_.r_a : spec_.r_b;
        uint64_t tbl_choices = uint64_t{1} << (uint64_t{1} << rbits);
        for (uint64_t p = 0; p < (uint64_t{1} << d); ++p) {
            uint64_t tbl = take(tbl_choices);
            CommSpec::Node nd;
            nd.speaker = spk;
            nd.send.resize(size_t{1} << rbits);
            for (size_t rr = 0; rr < nd.send.size(); ++rr) nd.send[rr] = (tbl >> rr) & 1;
            nodes[(size_t{1} << d) - 1 + p] = std::move(nd);
        }
    }
    uint64_t leaves = uint64_t{1} << cc;
    std::vector<std::vector<uint64_t>> aout(leaves, std::vector<uint64_t>(size_t{1} << spec_.r_a));
    std::vector<std::vector<uint64_t>> bout(leaves, std::vector<uint64_t>(size_t{1} << spec_.r_b));
    for (uint64_t t = 0; t < leaves; ++t)
        for (uint64_t ra = 0; ra < (uint64_t{1} << spec_.r_a); ++ra)
            aout[t][ra] = take(uint64_t{1} << spec_.n_a);
    for (uint64_t t = 0; t < leaves; ++t)
        for (uint64_t rb = 0; rb < (uint64_t{1} << spec_.r_b); ++rb)
            bout[t][rb] = take(uint64_t{1} << spec_.n_b);
    return SourceSpec{CommSpec(spec_.r_a, spec_.r_b, spec_.n_a, spec_.n_b, cc,
                               std::move(nodes), std::move(aout), std::move(bout))};
}

SourceSpec ClassEnum::affine_at(uint64_t idx) const {
    size_t lo = 0, hi = spans_.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (spans_[mid - 1].cum_end <= idx)
            lo = mid;
        else
            hi = mid;
    }
    const Span& sp = spans_[lo];
    uint64_t span_start = sp.cum_end - sp.coset_count;
    uint64_t coset_idx = idx - span_start;
    // Coset representative: scatter coset_idx bits over non-pivot columns.
    uint64_t rep = 0;
    uint64_t pivot_mask = 0;
    for (int p : sp.pivots) pivot_mask |= uint64_t{1} << p;
    int pos = 0;
    for (int col = 0; col < spec_.n_out; ++col) {
        if ((pivot_mask >> col) & 1) continue;
        if ((coset_idx >> pos) & 1) rep |= uint64_t{1} << col;
        ++pos;
    }
    // Representative source: P(y) = sum_i y_i * basis_i + rep on r inputs.
    std::vector<F2Poly> outs;
    outs.reserve(static_cast<size_t>(spec_.n_out));
    for (int j = 0; j < spec_.n_out; ++j) {
        std::vector<uint64_t> monos;
        for (int i = 0; i < sp.dim; ++i)
            if ((sp.basis[static_cast<size_t>(i)] >> j) & 1) monos.push_back(uint64_t{1} << i);
        if ((rep >> j) & 1) monos.push_back(0);
        outs.emplace_back(spec_.r, std::move(monos));
    }
    return SourceSpec{PolySource{F2PolyMap(spec_.r, 1, std::move(outs))}};
}

SourceSpec ClassEnum::random_at(uint64_t idx) const {
    Rng rng = Rng(spec_.seed).fork(idx);
    switch (spec_.model) {
        case Model::Polynomial:
            return SourceSpec{PolySource{random_poly_map(rng, spec_.r, spec_.n_out, spec_.degree)}};
        case Model::Local:
            return SourceSpec{random_local_source(rng, spec_.r, spec_.n_out, spec_.locality)};
        case Model::Robp:
            return SourceSpec{random_robp(rng, spec_.s, spec_.n_out, spec_.n_out)};
        case Model::Comm:
            return SourceSpec{random_comm(rng, spec_.c, spec_.r_a, spec_.r_b, spec_.n_a, spec_.n_b)};
        default:
            throw ValidationError("random enumeration unsupported for this model");
    }
}

SourceSpec ClassEnum::at(uint64_t idx) const {
    if (idx >= size_) throw ValidationError("class index out of range");
    if (spec_.mode == EnumMode::RandomSample) return random_at(idx);
    switch (spec_.model) {
        case Model::Explicit: return spec_.members[idx];
        case Model::Polynomial:
            return spec_.mode == EnumMode::AffineImages ? affine_at(idx) : poly_at(Int(static_cast<unsigned long>(idx)));
        case Model::Local: return local_at(Int(static_cast<unsigned long>(idx)));
        case Model::Comm: return comm_at(Int(static_cast<unsigned long>(idx)));
        default: throw ValidationError("unsupported class model");
    }
}

ExactDist ClassEnum::dist_at(uint64_t idx) const {
    if (spec_.mode == EnumMode::AffineImages) {
        size_t lo = 0, hi = spans_.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (spans_[mid - 1].cum_end <= idx)
                lo = mid;
            else
                hi = mid;
        }
        const Span& sp = spans_[lo];
        uint64_t span_start = sp.cum_end - sp.coset_count;
        uint64_t coset_idx = idx - span_start;
        uint64_t rep = 0;
        uint64_t pivot_mask = 0;
        for (int p : sp.pivots) pivot_mask |= uint64_t{1} << p;
        int pos = 0;
        for (int col = 0; col < spec_.n_out; ++col) {
            if ((pivot_mask >> col) & 1) continue;
            if ((coset_idx >> pos) & 1) rep |= uint64_t{1} << col;
            ++pos;
        }
        std::vector<Rat> probs(uint64_t{1} << spec_.n_out, Rat(0));
        Rat mass(1, 1ul << sp.dim);
        mass.canonicalize();
        for (uint64_t g = 0; g < (uint64_t{1} << sp.dim); ++g) {
            uint64_t pt = rep;
            for (int i = 0; i < sp.dim; ++i)
                if ((g >> i) & 1) pt ^= sp.basis[static_cast<size_t>(i)];
            probs[pt] = mass;
        }
        return ExactDist::unchecked(spec_.n_out, std::move(probs));
    }
    return exact_output(at(idx));
}

void ClassEnum::support_at(uint64_t idx, std::vector<uint64_t>& mask, int& dim) const {
    if (spec_.mode != EnumMode::AffineImages) throw ValidationError("support_at needs affine-images mode");
    size_t lo = 0, hi = spans_.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (spans_[mid - 1].cum_end <= idx)
            lo = mid;
        else
            hi = mid;
    }
    const Span& sp = spans_[lo];
    uint64_t span_start = sp.cum_end - sp.coset_count;
    uint64_t coset_idx = idx - span_start;
    uint64_t rep = 0;
    uint64_t pivot_mask = 0;
    for (int p : sp.pivots) pivot_mask |= uint64_t{1} << p;
    int pos = 0;
    for (int col = 0; col < spec_.n_out; ++col) {
        if ((pivot_mask >> col) & 1) continue;
        if ((coset_idx >> pos) & 1) rep |= uint64_t{1} << col;
        ++pos;
    }
    mask.assign(((uint64_t{1} << spec_.n_out) + 63) / 64, 0);
    for (uint64_t g = 0; g < (uint64_t{1} << sp.dim); ++g) {
        uint64_t pt = rep;
        for (int i = 0; i < sp.dim; ++i)
            if ((g >> i) & 1) pt ^= sp.basis[static_cast<size_t>(i)];
        mask[pt >> 6] |= uint64_t{1} << (pt & 63);
    }
    dim = sp.dim;
}

ExactDist exact_output(const SourceSpec& src) {
    const int n = src.output_bits();
    if (n < 1 || n > ExactDist::kMaxBits) throw ValidationError("source output bits out of range");

    if (const auto* mix = std::get_if<MixtureSource>(&src.body)) return dist::mixture_collapse(mix->mixture);

    std::vector<uint64_t> counts(uint64_t{1} << n, 0);
    if (const auto* poly = std::get_if<PolySource>(&src.body)) {
        int r = poly->map.n_inputs;
        if (r > 24) throw BudgetError("polynomial seed space exceeds 2^24");
        for (uint64_t x = 0; x < (uint64_t{1} << r); ++x) ++counts[f2::eval_map(poly->map, x)];
        return ExactDist::from_counts(n, counts, r);
    }
    if (const auto* loc = std::get_if<LocalSource>(&src.body)) {
        int r = loc->map.n_inputs;
        if (r > 24) throw BudgetError("local seed space exceeds 2^24");
        for (uint64_t x = 0; x < (uint64_t{1} << r); ++x) ++counts[f2::eval_map(loc->map, x)];
        return ExactDist::from_counts(n, counts, r);
    }
    if (const auto* robp = std::get_if<RobpSpec>(&src.body)) {
        int steps = robp->steps();
        if (steps > 24) throw BudgetError("robp seed space exceeds 2^24");
        for (uint64_t w = 0; w < (uint64_t{1} << steps); ++w) {
            int v = 0;
            uint64_t out = 0;
            int pos = 0;
            for (int l = 0; l < steps; ++l) {
                const auto& e = robp->edges[static_cast<size_t>(l)][static_cast<size_t>(v)][(w >> l) & 1];
                out |= e.label << pos;
                pos += robp->label_lens[static_cast<size_t>(l)];
                v = e.target;
            }
            ++counts[out];
        }
        return ExactDist::from_counts(n, counts, steps);
    }
    const auto& comm = std::get<CommSpec>(src.body);
    int rbits = comm.r_a_bits + comm.r_b_bits;
    for (uint64_t ra = 0; ra < (uint64_t{1} << comm.r_a_bits); ++ra) {
        for (uint64_t rb = 0; rb < (uint64_t{1} << comm.r_b_bits); ++rb) {
            uint64_t tau = 0;
            for (int d = 0; d < comm.cost; ++d) {
                const auto& nd = comm.nodes[(size_t{1} << d) - 1 + tau];
                uint64_t bit = nd.send[nd.speaker == 0 ? ra : rb];
                tau |= bit << d;
            }
            uint64_t out = comm.alice_out[tau][ra] | (comm.bob_out[tau][rb] << comm.n_a);
            ++counts[out];
        }
    }
    return ExactDist::from_counts(n, counts, rbits);
}

namespace {

size_t sample_categorical(const std::vector<Rat>& weights, Rng& rng) {
    Int den = 1;
    for (const auto& w : weights) {
        Int d = w.get_den();
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), d.get_mpz_t());
    }
    Int u = rng.mpz_below(den);
    Int acc = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        Int scaled = weights[i].get_num() * (den / weights[i].get_den());
        acc += scaled;
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace

uint64_t sample_source(const SourceSpec& src, Rng& rng) {
    if (const auto* poly = std::get_if<PolySource>(&src.body))
        return f2::eval_map(poly->map, rng.bits(poly->map.n_inputs));
    if (const auto* loc = std::get_if<LocalSource>(&src.body))
        return f2::eval_map(loc->map, rng.bits(loc->map.n_inputs));
    if (const auto* robp = std::get_if<RobpSpec>(&src.body)) {
        uint64_t w = rng.bits(robp->steps());
        int v = 0;
        uint64_t out = 0;
        int pos = 0;
        for (int l = 0; l < robp->steps(); ++l) {
            const auto& e = robp->edges[static_cast<size_t>(l)][static_cast<size_t>(v)][(w >> l) & 1];
            out |= e.label << pos;
            pos += robp->label_lens[static_cast<size_t>(l)];
            v = e.target;
        }
        return out;
    }
    if (const auto* comm = std::get_if<CommSpec>(&src.body)) {
        uint64_t ra = rng.bits(comm->r_a_bits);
        uint64_t rb = rng.bits(comm->r_b_bits);
        uint64_t tau = 0;
        for (int d = 0; d < comm->cost; ++d) {
            const auto& nd = comm->nodes[(size_t{1} << d) - 1 + tau];
            uint64_t bit = nd.send[nd.speaker == 0 ? ra : rb];
            tau |= bit << d;
        }
        return comm->alice_out[tau][ra] | (comm->bob_out[tau][rb] << comm->n_a);
    }
    const auto& mix = std::get<MixtureSource>(src.body).mixture;
    size_t part = sample_categorical(mix.weights, rng);
    return sample_categorical(mix.parts[part].probs(), rng);
}

ExactDist addr_of_dist(const ExactDist& d, int n, int t) {
    if (n < 1 || t < 1 || d.n() != t * (n + 1)) throw ValidationError("addr dimension mismatch");
    std::vector<Rat> out(uint64_t{1} << n, Rat(0));
    Rat fallback(0);
    const uint64_t block_mask = (uint64_t{1} << n) - 1;
    for (uint64_t z = 0; z < d.size(); ++z) {
        const Rat& p = d.prob(z);
        if (sgn(p) == 0) continue;
        int sel = -1;
        for (int i = 0; i < t; ++i)
            if ((z >> (static_cast<uint64_t>(t) * n + i)) & 1) {
                sel = i;
                break;
            }
        if (sel >= 0)
            out[(z >> (static_cast<uint64_t>(sel) * n)) & block_mask] += p;
        else
            fallback += p;
    }
    if (sgn(fallback) != 0) {
        Rat share = fallback / static_cast<unsigned long>(uint64_t{1} << n);
        for (auto& q : out) q += share;
    }
    return ExactDist::unchecked(n, std::move(out));
}

ExactDist addr_compose(const SourceSpec& src, int n, int t) {
    return addr_of_dist(exact_output(src), n, t);
}

ExactDist marginal(const ExactDist& d, int offset, int len) {
    if (offset < 0 || len < 1 || offset + len > d.n()) throw ValidationError("marginal range invalid");
    std::vector<Rat> out(uint64_t{1} << len, Rat(0));
    const uint64_t mask = (uint64_t{1} << len) - 1;
    for (uint64_t z = 0; z < d.size(); ++z)
        if (sgn(d.prob(z)) != 0) out[(z >> offset) & mask] += d.prob(z);
    return ExactDist::unchecked(len, std::move(out));
}

Mixture comm_to_mixture(const CommSpec& c) {
    std::vector<Rat> weights;
    std::vector<ExactDist> parts;
    const uint64_t ra_n = uint64_t{1} << c.r_a_bits;
    const uint64_t rb_n = uint64_t{1} << c.r_b_bits;
    std::vector<uint64_t> cons_a, cons_b;
    for (uint64_t tau = 0; tau < (uint64_t{1} << c.cost); ++tau) {
        cons_a.clear();
        cons_b.clear();
        for (uint64_t ra = 0; ra < ra_n; ++ra) {
            bool ok = true;
            for (int d = 0; d < c.cost && ok; ++d) {
                const auto& nd = c.nodes[(size_t{1} << d) - 1 + (tau & ((uint64_t{1} << d) - 1))];
                if (nd.speaker == 0 && nd.send[ra] != ((tau >> d) & 1)) ok = false;
            }
            if (ok) cons_a.push_back(ra);
        }
        if (cons_a.empty()) continue;
        for (uint64_t rb = 0; rb < rb_n; ++rb) {
            bool ok = true;
            for (int d = 0; d < c.cost && ok; ++d) {
                const auto& nd = c.nodes[(size_t{1} << d) - 1 + (tau & ((uint64_t{1} << d) - 1))];
                if (nd.speaker == 1 && nd.send[rb] != ((tau >> d) & 1)) ok = false;
            }
            if (ok) cons_b.push_back(rb);
        }
        if (cons_b.empty()) continue;

        Rat w(static_cast<unsigned long>(cons_a.size() * cons_b.size()),
              static_cast<unsigned long>(ra_n * rb_n));
        w.canonicalize();
        std::vector<Rat> pa(uint64_t{1} << c.n_a, Rat(0));
        Rat ua(1, static_cast<unsigned long>(cons_a.size()));
        ua.canonicalize();
        for (uint64_t ra : cons_a) pa[c.alice_out[tau][ra]] += ua;
        std::vector<Rat> pb(uint64_t{1} << c.n_b, Rat(0));
        Rat ub(1, static_cast<unsigned long>(cons_b.size()));
        ub.canonicalize();
        for (uint64_t rb : cons_b) pb[c.bob_out[tau][rb]] += ub;
        parts.push_back(dist::product(ExactDist::unchecked(c.n_a, std::move(pa)),
                                      ExactDist::unchecked(c.n_b, std::move(pb))));
        weights.push_back(std::move(w));
    }
    return Mixture(std::move(weights), std::move(parts));
}

CommSpec robp_partition_to_comm(const RobpSpec& r, int cut) {
    if (cut < 0 || cut > r.steps()) throw ValidationError("cut not on a layer boundary");
    int n_a = 0, n_b = 0;
    for (int l = 0; l < cut; ++l) n_a += r.label_lens[static_cast<size_t>(l)];
    for (int l = cut; l < r.steps(); ++l) n_b += r.label_lens[static_cast<size_t>(l)];
    if (n_a < 1 || n_b < 1) throw ValidationError("cut leaves one side without output bits");

    const int w_cut = r.widths[static_cast<size_t>(cut)];
    const int t_bits = ceil_log2_u(static_cast<uint64_t>(w_cut));
    const int ra_bits = cut;
    const int rb_bits = r.steps() - cut;

    // Alice's private walk over the prefix.
    const uint64_t ra_n = uint64_t{1} << ra_bits;
    std::vector<int> vertex_at_cut(ra_n);
    std::vector<uint64_t> prefix_out(ra_n);
    for (uint64_t ra = 0; ra < ra_n; ++ra) {
        int v = 0;
        uint64_t out = 0;
        int pos = 0;
        for (int l = 0; l < cut; ++l) {
            const auto& e = r.edges[static_cast<size_t>(l)][static_cast<size_t>(v)][(ra >> l) & 1];
            out |= e.label << pos;
            pos += r.label_lens[static_cast<size_t>(l)];
            v = e.target;
        }
        vertex_at_cut[ra] = v;
        prefix_out[ra] = out;
    }

    // Alice announces her cut vertex bit by bit.
    std::vector<CommSpec::Node> nodes((size_t{1} << t_bits) - 1);
    for (int d = 0; d < t_bits; ++d) {
        for (uint64_t p = 0; p < (uint64_t{1} << d); ++p) {
            CommSpec::Node nd;
            nd.speaker = 0;
            nd.send.resize(ra_n);
            for (uint64_t ra = 0; ra < ra_n; ++ra)
                nd.send[ra] = static_cast<uint8_t>((static_cast<uint64_t>(vertex_at_cut[ra]) >> d) & 1);
            nodes[(size_t{1} << d) - 1 + p] = std::move(nd);
        }
    }

    const uint64_t leaves = uint64_t{1} << t_bits;
    const uint64_t rb_n = uint64_t{1} << rb_bits;
    std::vector<std::vector<uint64_t>> aout(leaves, std::vector<uint64_t>(ra_n));
    std::vector<std::vector<uint64_t>> bout(leaves, std::vector<uint64_t>(rb_n, 0));
    for (uint64_t tau = 0; tau < leaves; ++tau)
        for (uint64_t ra = 0; ra < ra_n; ++ra) aout[tau][ra] = prefix_out[ra];
    for (uint64_t tau = 0; tau < leaves; ++tau) {
        if (tau >= static_cast<uint64_t>(w_cut)) continue;  // unreachable transcript
        for (uint64_t rb = 0; rb < rb_n; ++rb) {
            int v = static_cast<int>(tau);
            uint64_t out = 0;
            int pos = 0;
            for (int l = cut; l < r.steps(); ++l) {
                const auto& e = r.edges[static_cast<size_t>(l)][static_cast<size_t>(v)][(rb >> (l - cut)) & 1];
                out |= e.label << pos;
                pos += r.label_lens[static_cast<size_t>(l)];
                v = e.target;
            }
            bout[tau][rb] = out;
        }
    }
    return CommSpec(ra_bits, rb_bits, n_a, n_b, t_bits, std::move(nodes), std::move(aout), std::move(bout));
}

PolySource local_to_polynomial(const LocalSource& src) {
    return PolySource{F2PolyMap(src.map.n_inputs, std::min(src.locality, src.map.n_inputs), src.map.outputs)};
}

F2PolyMap random_poly_map(Rng& rng, int r, int n_out, int degree) {
    auto monos = monomial_masks(r, degree);
    std::vector<F2Poly> outs;
    outs.reserve(static_cast<size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
        std::vector<uint64_t> chosen;
        for (uint64_t m : monos)
            if (rng.coin()) chosen.push_back(m);
        outs.emplace_back(r, std::move(chosen));
    }
    return F2PolyMap(r, degree, std::move(outs));
}

LocalSource random_local_source(Rng& rng, int r, int n_out, int locality) {
    int k = std::min(locality, r);
    std::vector<F2Poly> outs;
    outs.reserve(static_cast<size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
        auto vars = rng.distinct(static_cast<uint64_t>(k), static_cast<uint64_t>(r));
        std::vector<int> support(vars.begin(), vars.end());
        std::vector<uint8_t> table(size_t{1} << k);
        for (auto& t : table) t = static_cast<uint8_t>(rng.bits(1));
        outs.push_back(table_to_anf(r, support, table));
    }
    return LocalSource(F2PolyMap(r, k, std::move(outs)), locality);
}

RobpSpec random_robp(Rng& rng, int s, int output_bits, int max_steps) {
    int steps = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(std::min(max_steps, output_bits))));
    // Composition of output_bits into `steps` positive parts.
    std::vector<int> lens(static_cast<size_t>(steps), 1);
    if (steps > 1) {
        auto cuts = rng.distinct(static_cast<uint64_t>(steps - 1), static_cast<uint64_t>(output_bits - 1));
        int prev = 0;
        for (int i = 0; i < steps - 1; ++i) {
            lens[static_cast<size_t>(i)] = static_cast<int>(cuts[static_cast<size_t>(i)]) + 1 - prev;
            prev = static_cast<int>(cuts[static_cast<size_t>(i)]) + 1;
        }
        lens[static_cast<size_t>(steps - 1)] = output_bits - prev;
    } else {
        lens[0] = output_bits;
    }
    std::vector<int> widths(static_cast<size_t>(steps + 1), 1);
    for (int l = 1; l <= steps; ++l) widths[static_cast<size_t>(l)] = 1 + static_cast<int>(rng.below(uint64_t{1} << s));
    std::vector<std::vector<std::array<RobpSpec::Edge, 2>>> edges(static_cast<size_t>(steps));
    for (int l = 0; l < steps; ++l) {
        edges[static_cast<size_t>(l)].resize(static_cast<size_t>(widths[static_cast<size_t>(l)]));
        for (auto& pair : edges[static_cast<size_t>(l)])
            for (auto& e : pair) {
                e.target = static_cast<int>(rng.below(static_cast<uint64_t>(widths[static_cast<size_t>(l) + 1])));
                e.label = rng.bits(lens[static_cast<size_t>(l)]);
            }
    }
    return RobpSpec(s, std::move(widths), std::move(lens), std::move(edges));
}

CommSpec random_comm(Rng& rng, int cost, int r_a, int r_b, int n_a, int n_b) {
    std::vector<CommSpec::Node> nodes((size_t{1} << cost) - 1);
    for (int d = 0; d < cost; ++d)
        for (uint64_t p = 0; p < (uint64_t{1} << d); ++p) {
            CommSpec::Node nd;
            nd.speaker = static_cast<int>(rng.bits(1));
            nd.send.resize(size_t{1} << (nd.speaker == 0 ? r_a : r_b));
            for (auto& b : nd.send) b = static_cast<uint8_t>(rng.bits(1));
            nodes[(size_t{1} << d) - 1 + p] = std::move(nd);
        }
    uint64_t leaves = uint64_t{1} << cost;
    std::vector<std::vector<uint64_t>> aout(leaves, std::vector<uint64_t>(size_t{1} << r_a));
    std::vector<std::vector<uint64_t>> bout(leaves, std::vector<uint64_t>(size_t{1} << r_b));
    for (auto& row : aout)
        for (auto& v : row) v = rng.bits(n_a);
    for (auto& row : bout)
        for (auto& v : row) v = rng.bits(n_b);
    return CommSpec(r_a, r_b, n_a, n_b, cost, std::move(nodes), std::move(aout), std::move(bout));
}

F2Poly table_to_anf(int r, const std::vector<int>& support, const std::vector<uint8_t>& table) {
    const int k = static_cast<int>(support.size());
    if (table.size() != (size_t{1} << k)) throw ValidationError("truth table size mismatch");
    std::vector<uint8_t> f = table;
    // Moebius transform over the local variables.
    for (int i = 0; i < k; ++i)
        for (uint64_t m = 0; m < (uint64_t{1} << k); ++m)
            if ((m >> i) & 1) f[m] ^= f[m ^ (uint64_t{1} << i)];
    std::vector<uint64_t> monos;
    for (uint64_t m = 0; m < (uint64_t{1} << k); ++m) {
        if (!f[m]) continue;
        uint64_t mono = 0;
        for (int i = 0; i < k; ++i)
            if ((m >> i) & 1) mono |= uint64_t{1} << support[static_cast<size_t>(i)];
        monos.push_back(mono);
    }
    return F2Poly(r, std::move(monos));
}

}  // namespace isolab::sources
