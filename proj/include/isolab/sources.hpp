#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "isolab/distlab.hpp"
#include "isolab/f2algebra.hpp"
#include "isolab/rng.hpp"

namespace isolab::sources {

using dist::ExactDist;
using dist::Mixture;
using f2::F2PolyMap;

struct PolySource {
    F2PolyMap map;
    bool operator==(const PolySource&) const = default;
};

// Polynomial map where each output reads at most `locality` input bits.
struct LocalSource {
    F2PolyMap map;
    int locality = 1;

    LocalSource() = default;
    LocalSource(F2PolyMap m, int loc);
    bool operator==(const LocalSource&) const = default;
};

// Width-2^s multi-output read-once branching program. Layer 0 holds the
// single start vertex; edges out of layer l emit labels of label_lens[l]
// bits, and all target layer l+1.
struct RobpSpec {
    struct Edge {
        int target = 0;
        uint64_t label = 0;
        bool operator==(const Edge&) const = default;
    };
    int s = 0;
    std::vector<int> widths;      // widths[0] == 1
    std::vector<int> label_lens;  // size widths.size() - 1
    std::vector<std::vector<std::array<Edge, 2>>> edges;
    int output_bits = 0;

    RobpSpec() = default;
    RobpSpec(int s_bound, std::vector<int> w, std::vector<int> lens,
             std::vector<std::vector<std::array<Edge, 2>>> e);
    int steps() const { return static_cast<int>(label_lens.size()); }
    bool operator==(const RobpSpec&) const = default;
};

// Two-party protocol tree. The tree is a perfect binary tree of depth
// `cost`; the node reached by transcript prefix p at depth d sits at flat
// index (2^d - 1) + p, where bit i of p is the bit sent at depth i. Each
// internal node is owned by one speaker and sends a bit that is a function
// of that speaker's private randomness (the node itself encodes the
// transcript so far). Leaf outputs are explicit tables.
struct CommSpec {
    struct Node {
        int speaker = 0;            // 0 = Alice, 1 = Bob
        std::vector<uint8_t> send;  // indexed by the speaker's randomness
        bool operator==(const Node&) const = default;
    };
    int r_a_bits = 0, r_b_bits = 0;
    int n_a = 0, n_b = 0;
    int cost = 0;
    std::vector<Node> nodes;                      // size 2^cost - 1
    std::vector<std::vector<uint64_t>> alice_out;  // [transcript][r_a] -> n_a bits
    std::vector<std::vector<uint64_t>> bob_out;    // [transcript][r_b] -> n_b bits

    CommSpec() = default;
    CommSpec(int ra, int rb, int na, int nb, int c, std::vector<Node> ns,
             std::vector<std::vector<uint64_t>> aout, std::vector<std::vector<uint64_t>> bout);
    int output_bits() const { return n_a + n_b; }
    bool operator==(const CommSpec&) const = default;
};

struct MixtureSource {
    Mixture mixture;
    bool operator==(const MixtureSource&) const = default;
};

struct SourceSpec {
    std::variant<PolySource, LocalSource, RobpSpec, CommSpec, MixtureSource> body;

    int output_bits() const;
    std::string model_name() const;
    bool operator==(const SourceSpec&) const = default;
};

enum class Model { Polynomial, Local, Robp, Comm, Explicit };
enum class EnumMode {
    Exhaustive,    // every member once, canonical order
    AffineImages,  // degree-1 polynomial classes only: one member per distinct
                   // output distribution (uniform on an affine subspace)
    RandomSample,  // seeded reproducible sample
};

struct ClassSpec {
    Model model = Model::Polynomial;
    int n_out = 0;
    int r = 0;           // input-bit cap
    bool r_upto = false;  // enumerate r' = 1..r instead of exactly r
    int degree = 1;
    int locality = 1;
    int s = 0;
    int c = 0;
    bool c_upto = false;
    int r_a = 0, r_b = 0, n_a = 0, n_b = 0;
    EnumMode mode = EnumMode::Exhaustive;
    uint64_t sample_count = 0;
    uint64_t seed = 0;
    uint64_t budget = uint64_t{1} << 22;
    // When > 0 the class is {addr_{m,addr_t}(X) : X in the base class} with
    // m = n_out/addr_t - 1; consumers compose addr on each member.
    int addr_t = 0;
    std::vector<SourceSpec> members;  // Model::Explicit

    std::string describe() const;
    // Same class membership, ignoring the enumeration budget.
    bool same_class(const ClassSpec& other) const;
};

// Stateless canonical enumeration; member i is reproducible in isolation so
// sweeps can shard by index.
class ClassEnum {
  public:
    explicit ClassEnum(ClassSpec spec);

    const ClassSpec& spec() const { return spec_; }
    // Exact class size (exhaustive modes); may exceed 2^64.
    const Int& total_count() const { return total_count_; }
    // Stream length actually enumerated.
    uint64_t size() const { return size_; }
    SourceSpec at(uint64_t idx) const;
    // Output distribution of member idx, with fast paths per mode.
    ExactDist dist_at(uint64_t idx) const;

    bool has_affine_fast_path() const { return spec_.mode == EnumMode::AffineImages; }
    // AffineImages only: support bitmask over 2^n_out plus subspace dimension.
    void support_at(uint64_t idx, std::vector<uint64_t>& mask, int& dim) const;

  private:
    struct Span {
        int dim;
        std::vector<uint64_t> basis;
        std::vector<int> pivots;
        uint64_t coset_count;
        uint64_t cum_end;  // cumulative stream position after this span
    };
    struct PolyBlock {
        int r;
        std::vector<uint64_t> monomials;
        Int count;
        Int cum_end;
    };
    struct CommBlock {
        int cost;
        Int count;
        Int cum_end;
    };

    SourceSpec poly_at(const Int& idx) const;
    SourceSpec local_at(const Int& idx) const;
    SourceSpec comm_at(const Int& idx) const;
    SourceSpec random_at(uint64_t idx) const;
    SourceSpec affine_at(uint64_t idx) const;

    ClassSpec spec_;
    Int total_count_;
    uint64_t size_ = 0;
    std::vector<PolyBlock> poly_blocks_;
    std::vector<CommBlock> comm_blocks_;
    std::vector<Span> spans_;
};

// Exact output distribution; the full seed space is enumerated, so it is
// capped at 2^24 states.
ExactDist exact_output(const SourceSpec& src);

// One sample from the source.
uint64_t sample_source(const SourceSpec& src, Rng& rng);

// addr_{n,t} applied to a distribution over t(n+1) bits laid out as
// (A_1..A_t, b_1..b_t). The uniform fallback is fresh randomness, accounted
// exactly.
ExactDist addr_of_dist(const ExactDist& d, int n, int t);
ExactDist addr_compose(const SourceSpec& src, int n, int t);

// Marginal of d onto `len` coordinates starting at bit position `offset`.
ExactDist marginal(const ExactDist& d, int offset, int len);

// One mixture part per positive-probability transcript; each part is the
// product of the Alice- and Bob-conditional output distributions.
Mixture comm_to_mixture(const CommSpec& c);

// Protocol sampling the same joint distribution with Alice holding the
// output bits emitted before the cut. cut is a layer index in [0, steps].
CommSpec robp_partition_to_comm(const RobpSpec& r, int cut);

// A d-local source is a degree-d polynomial source.
PolySource local_to_polynomial(const LocalSource& src);

// Seeded random instances used by RandomSample enumeration and tests.
F2PolyMap random_poly_map(Rng& rng, int r, int n_out, int degree);
LocalSource random_local_source(Rng& rng, int r, int n_out, int locality);
RobpSpec random_robp(Rng& rng, int s, int output_bits, int max_steps);
CommSpec random_comm(Rng& rng, int cost, int r_a, int r_b, int n_a, int n_b);

// Truth table (2^k entries) over the variables listed in `support` -> ANF
// polynomial over r variables.
f2::F2Poly table_to_anf(int r, const std::vector<int>& support, const std::vector<uint8_t>& table);

}  // namespace isolab::sources
