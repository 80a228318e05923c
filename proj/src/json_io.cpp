#include "isolab/json_io.hpp"

#include <fstream>
#include <sstream>

namespace isolab::io {

namespace {

Rat rat_field(const json& j) { return rat_from_string(j.get<std::string>()); }
json rat_json(const Rat& r) { return rat_to_string(r); }

}  // namespace

json poly_map_to_json(const f2::F2PolyMap& f) {
    json outs = json::array();
    for (const auto& p : f.outputs) {
        json monos = json::array();
        for (uint64_t m : p.monomials) {
            json idxs = json::array();
            for (int v = 0; v < f.n_inputs; ++v)
                if ((m >> v) & 1) idxs.push_back(v);
            monos.push_back(idxs);
        }
        outs.push_back(monos);
    }
    return json{{"n_inputs", f.n_inputs}, {"degree_bound", f.degree_bound}, {"outputs", outs}};
}

f2::F2PolyMap poly_map_from_json(const json& j) {
    int r = j.at("n_inputs").get<int>();
    int d = j.at("degree_bound").get<int>();
    std::vector<f2::F2Poly> outs;
    for (const auto& out : j.at("outputs")) {
        if (out.is_null()) {  // absent output list = the zero polynomial
            outs.push_back(f2::F2Poly::zero(r));
            continue;
        }
        std::vector<uint64_t> monos;
        for (const auto& mono : out) {
            uint64_t m = 0;
            for (const auto& idx : mono) {
                int v = idx.get<int>();
                if (v < 0 || v >= r) throw ValidationError("monomial index out of range");
                m |= uint64_t{1} << v;
            }
            monos.push_back(m);
        }
        outs.emplace_back(r, std::move(monos));
    }
    return f2::F2PolyMap(r, d, std::move(outs));
}

json dist_to_json(const dist::ExactDist& d) {
    json probs = json::array();
    for (uint64_t x = 0; x < d.size(); ++x) probs.push_back(rat_to_string(d.prob(x)));
    return json{{"n", d.n()}, {"probs", probs}};
}

dist::ExactDist dist_from_json(const json& j) {
    int n = j.at("n").get<int>();
    std::vector<Rat> probs;
    for (const auto& p : j.at("probs")) probs.push_back(rat_field(p));
    return dist::ExactDist::from_probs(n, std::move(probs));
}

json mixture_to_json(const dist::Mixture& m) {
    json ws = json::array(), ps = json::array();
    for (const auto& w : m.weights) ws.push_back(rat_to_string(w));
    for (const auto& p : m.parts) ps.push_back(dist_to_json(p));
    return json{{"weights", ws}, {"parts", ps}};
}

dist::Mixture mixture_from_json(const json& j) {
    std::vector<Rat> ws;
    std::vector<dist::ExactDist> ps;
    for (const auto& w : j.at("weights")) ws.push_back(rat_field(w));
    for (const auto& p : j.at("parts")) ps.push_back(dist_from_json(p));
    return dist::Mixture(std::move(ws), std::move(ps));
}

namespace {

std::string label_to_string(uint64_t label, int len) {
    return f2::BitVec(label, len).to_string();
}

json robp_to_json(const sources::RobpSpec& r) {
    json edges = json::array();
    for (int l = 0; l < r.steps(); ++l)
        for (int v = 0; v < r.widths[static_cast<size_t>(l)]; ++v)
            for (int b = 0; b < 2; ++b) {
                const auto& e = r.edges[static_cast<size_t>(l)][static_cast<size_t>(v)][b];
                edges.push_back(json{{"layer", l},
                                     {"vertex", v},
                                     {"bit", b},
                                     {"target", e.target},
                                     {"label", label_to_string(e.label, r.label_lens[static_cast<size_t>(l)])}});
            }
    return json{{"s", r.s}, {"widths", r.widths}, {"label_lens", r.label_lens}, {"edges", edges}};
}

sources::RobpSpec robp_from_json(const json& j) {
    int s = j.at("s").get<int>();
    auto widths = j.at("widths").get<std::vector<int>>();
    auto lens = j.at("label_lens").get<std::vector<int>>();
    std::vector<std::vector<std::array<sources::RobpSpec::Edge, 2>>> edges(lens.size());
    for (size_t l = 0; l < lens.size(); ++l) edges[l].resize(static_cast<size_t>(widths.at(l)));
    for (const auto& e : j.at("edges")) {
        int l = e.at("layer").get<int>();
        int v = e.at("vertex").get<int>();
        int b = e.at("bit").get<int>();
        if (l < 0 || static_cast<size_t>(l) >= lens.size()) throw ValidationError("edge layer out of range");
        if (v < 0 || v >= widths.at(static_cast<size_t>(l))) throw ValidationError("edge vertex out of range");
        if (b != 0 && b != 1) throw ValidationError("edge bit must be 0/1");
        auto& slot = edges[static_cast<size_t>(l)][static_cast<size_t>(v)][b];
        slot.target = e.at("target").get<int>();
        std::string lbl = e.at("label").get<std::string>();
        if (static_cast<int>(lbl.size()) != lens[static_cast<size_t>(l)]) {
            if (!(lbl.empty() && lens[static_cast<size_t>(l)] == 0))
                throw ValidationError("label length does not match layer");
        }
        slot.label = lbl.empty() ? 0 : f2::BitVec::from_string(lbl).bits;
    }
    return sources::RobpSpec(s, std::move(widths), std::move(lens), std::move(edges));
}

json comm_node_to_json(const sources::CommSpec& c, int depth, uint64_t path) {
    if (depth == c.cost) {
        json al = json::array(), bo = json::array();
        for (uint64_t ra = 0; ra < (uint64_t{1} << c.r_a_bits); ++ra)
            al.push_back(label_to_string(c.alice_out[path][ra], c.n_a));
        for (uint64_t rb = 0; rb < (uint64_t{1} << c.r_b_bits); ++rb)
            bo.push_back(label_to_string(c.bob_out[path][rb], c.n_b));
        return json{{"alice", al}, {"bob", bo}};
    }
    const auto& nd = c.nodes[(size_t{1} << depth) - 1 + path];
    json send = json::array();
    for (uint8_t b : nd.send) send.push_back(static_cast<int>(b));
    return json{{"speaker", nd.speaker == 0 ? "A" : "B"},
                {"send", send},
                {"zero", comm_node_to_json(c, depth + 1, path)},
                {"one", comm_node_to_json(c, depth + 1, path | (uint64_t{1} << depth))}};
}

json comm_to_json(const sources::CommSpec& c) {
    return json{{"r_a_bits", c.r_a_bits}, {"r_b_bits", c.r_b_bits}, {"n_a", c.n_a},
                {"n_b", c.n_b},           {"cost", c.cost},         {"tree", comm_node_to_json(c, 0, 0)}};
}

void comm_node_from_json(const json& node, int depth, uint64_t path, int cost,
                         std::vector<sources::CommSpec::Node>& nodes,
                         std::vector<std::vector<uint64_t>>& aout,
                         std::vector<std::vector<uint64_t>>& bout) {
    if (depth == cost) {
        auto& arow = aout[path];
        auto& brow = bout[path];
        const auto& al = node.at("alice");
        const auto& bo = node.at("bob");
        if (al.size() != arow.size() || bo.size() != brow.size())
            throw ValidationError("leaf output table size mismatch");
        for (size_t i = 0; i < arow.size(); ++i)
            arow[i] = al[i].get<std::string>().empty() ? 0 : f2::BitVec::from_string(al[i].get<std::string>()).bits;
        for (size_t i = 0; i < brow.size(); ++i)
            brow[i] = bo[i].get<std::string>().empty() ? 0 : f2::BitVec::from_string(bo[i].get<std::string>()).bits;
        return;
    }
    sources::CommSpec::Node nd;
    std::string spk = node.at("speaker").get<std::string>();
    if (spk != "A" && spk != "B") throw ValidationError("speaker must be A or B");
    nd.speaker = spk == "A" ? 0 : 1;
    for (const auto& b : node.at("send")) nd.send.push_back(static_cast<uint8_t>(b.get<int>() & 1));
    nodes[(size_t{1} << depth) - 1 + path] = std::move(nd);
    comm_node_from_json(node.at("zero"), depth + 1, path, cost, nodes, aout, bout);
    comm_node_from_json(node.at("one"), depth + 1, path | (uint64_t{1} << depth), cost, nodes, aout, bout);
}

sources::CommSpec comm_from_json(const json& j) {
    int ra = j.at("r_a_bits").get<int>();
    int rb = j.at("r_b_bits").get<int>();
    int na = j.at("n_a").get<int>();
    int nb = j.at("n_b").get<int>();
    int cost = j.at("cost").get<int>();
    std::vector<sources::CommSpec::Node> nodes((size_t{1} << cost) - 1);
    std::vector<std::vector<uint64_t>> aout(size_t{1} << cost, std::vector<uint64_t>(size_t{1} << ra, 0));
    std::vector<std::vector<uint64_t>> bout(size_t{1} << cost, std::vector<uint64_t>(size_t{1} << rb, 0));
    comm_node_from_json(j.at("tree"), 0, 0, cost, nodes, aout, bout);
    return sources::CommSpec(ra, rb, na, nb, cost, std::move(nodes), std::move(aout), std::move(bout));
}

}  // namespace

json source_to_json(const sources::SourceSpec& s) {
    json body;
    if (const auto* p = std::get_if<sources::PolySource>(&s.body)) {
        body = poly_map_to_json(p->map);
    } else if (const auto* l = std::get_if<sources::LocalSource>(&s.body)) {
        body = poly_map_to_json(l->map);
        body["locality"] = l->locality;
    } else if (const auto* r = std::get_if<sources::RobpSpec>(&s.body)) {
        body = robp_to_json(*r);
    } else if (const auto* c = std::get_if<sources::CommSpec>(&s.body)) {
        body = comm_to_json(*c);
    } else {
        body = mixture_to_json(std::get<sources::MixtureSource>(s.body).mixture);
    }
    return json{{"model", s.model_name()}, {"body", body}};
}

sources::SourceSpec source_from_json(const json& j) {
    std::string model = j.at("model").get<std::string>();
    const json& body = j.at("body");
    if (model == "polynomial") return sources::SourceSpec{sources::PolySource{poly_map_from_json(body)}};
    if (model == "local")
        return sources::SourceSpec{sources::LocalSource(poly_map_from_json(body), body.at("locality").get<int>())};
    if (model == "robp") return sources::SourceSpec{robp_from_json(body)};
    if (model == "comm") return sources::SourceSpec{comm_from_json(body)};
    if (model == "mixture") return sources::SourceSpec{sources::MixtureSource{mixture_from_json(body)}};
    throw ValidationError("unknown source model: " + model);
}

namespace {

std::string model_tag(sources::Model m) {
    switch (m) {
        case sources::Model::Polynomial: return "polynomial";
        case sources::Model::Local: return "local";
        case sources::Model::Robp: return "robp";
        case sources::Model::Comm: return "comm";
        default: return "explicit";
    }
}

sources::Model model_from_tag(const std::string& t) {
    if (t == "polynomial") return sources::Model::Polynomial;
    if (t == "local") return sources::Model::Local;
    if (t == "robp") return sources::Model::Robp;
    if (t == "comm") return sources::Model::Comm;
    if (t == "explicit") return sources::Model::Explicit;
    throw ValidationError("unknown class model: " + t);
}

std::string mode_tag(sources::EnumMode m) {
    switch (m) {
        case sources::EnumMode::Exhaustive: return "exhaustive";
        case sources::EnumMode::AffineImages: return "affine-images";
        default: return "random-sample";
    }
}

sources::EnumMode mode_from_tag(const std::string& t) {
    if (t == "exhaustive") return sources::EnumMode::Exhaustive;
    if (t == "affine-images") return sources::EnumMode::AffineImages;
    if (t == "random-sample") return sources::EnumMode::RandomSample;
    throw ValidationError("unknown enumeration mode: " + t);
}

}  // namespace

json class_to_json(const sources::ClassSpec& c) {
    json j{{"model", model_tag(c.model)},
           {"n", c.n_out},
           {"r", c.r},
           {"r_upto", c.r_upto},
           {"degree", c.degree},
           {"locality", c.locality},
           {"s", c.s},
           {"c", c.c},
           {"c_upto", c.c_upto},
           {"r_a", c.r_a},
           {"r_b", c.r_b},
           {"n_a", c.n_a},
           {"n_b", c.n_b},
           {"mode", mode_tag(c.mode)},
           {"sample_count", c.sample_count},
           {"seed", c.seed},
           {"budget", c.budget},
           {"addr_t", c.addr_t}};
    if (c.model == sources::Model::Explicit) {
        json members = json::array();
        for (const auto& m : c.members) members.push_back(source_to_json(m));
        j["members"] = members;
    }
    return j;
}

sources::ClassSpec class_from_json(const json& j) {
    sources::ClassSpec c;
    c.model = model_from_tag(j.at("model").get<std::string>());
    c.n_out = j.at("n").get<int>();
    c.r = j.value("r", 0);
    c.r_upto = j.value("r_upto", false);
    c.degree = j.value("degree", 1);
    c.locality = j.value("locality", 1);
    c.s = j.value("s", 0);
    c.c = j.value("c", 0);
    c.c_upto = j.value("c_upto", false);
    c.r_a = j.value("r_a", 0);
    c.r_b = j.value("r_b", 0);
    c.n_a = j.value("n_a", 0);
    c.n_b = j.value("n_b", 0);
    c.mode = mode_from_tag(j.value("mode", std::string("exhaustive")));
    c.sample_count = j.value("sample_count", uint64_t{0});
    c.seed = j.value("seed", uint64_t{0});
    c.budget = j.value("budget", uint64_t{1} << 22);
    c.addr_t = j.value("addr_t", 0);
    if (c.model == sources::Model::Explicit)
        for (const auto& m : j.at("members")) c.members.push_back(source_from_json(m));
    return c;
}

std::string table_to_hex(const iso::BoolFnTable& t) {
    // Big integer hex of the table (bit x = value at input x), fixed width.
    uint64_t nbits = t.size();
    size_t digits = static_cast<size_t>((nbits + 3) / 4);
    std::string out(digits, '0');
    for (size_t d = 0; d < digits; ++d) {
        uint64_t lo = static_cast<uint64_t>(d) * 4;
        int nib = 0;
        for (int b = 0; b < 4; ++b) {
            uint64_t x = lo + static_cast<uint64_t>(b);
            if (x < nbits && t.get(x)) nib |= 1 << b;
        }
        out[digits - 1 - d] = "0123456789abcdef"[nib];
    }
    return out;
}

iso::BoolFnTable table_from_hex(int n, const std::string& hex) {
    uint64_t nbits = uint64_t{1} << n;
    size_t digits = static_cast<size_t>((nbits + 3) / 4);
    if (hex.size() != digits) throw ValidationError("table hex width mismatch");
    std::vector<uint8_t> vals(nbits, 0);
    for (size_t d = 0; d < digits; ++d) {
        char ch = hex[digits - 1 - d];
        int nib;
        if (ch >= '0' && ch <= '9')
            nib = ch - '0';
        else if (ch >= 'a' && ch <= 'f')
            nib = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F')
            nib = ch - 'A' + 10;
        else
            throw ValidationError("table hex contains non-hex characters");
        for (int b = 0; b < 4; ++b) {
            uint64_t x = static_cast<uint64_t>(d) * 4 + static_cast<uint64_t>(b);
            if (x < nbits) vals[x] = (nib >> b) & 1;
        }
    }
    return iso::BoolFnTable::from_values(n, vals);
}

json isolator_to_json(const iso::IsolatorSpec& s) {
    return json{{"n", s.fn.n},
                {"table", table_to_hex(s.fn)},
                {"alpha", rat_json(s.alpha)},
                {"beta", rat_json(s.beta)},
                {"k", rat_json(s.k.k)},
                {"k_threshold_approx", pow2_neg(s.k).approx},
                {"class", class_to_json(s.cls)},
                {"verified", iso::verified_name(s.verified)},
                {"degenerate", s.degenerate}};
}

iso::IsolatorSpec isolator_from_json(const json& j) {
    int n = j.at("n").get<int>();
    iso::IsolatorSpec s(table_from_hex(n, j.at("table").get<std::string>()), rat_field(j.at("alpha")),
                        rat_field(j.at("beta")), KExp(rat_field(j.at("k"))), class_from_json(j.at("class")));
    std::string v = j.value("verified", std::string("unverified"));
    if (v == "verified-exhaustive")
        s.verified = iso::Verified::Exhaustive;
    else if (v == "verified-sampled")
        s.verified = iso::Verified::Sampled;
    else if (v == "unverified")
        s.verified = iso::Verified::Unverified;
    else
        throw ValidationError("unknown verification state: " + v);
    return s;
}

json fn_table_to_json(const iso::MultiOutFnTable& t) {
    json vals = json::array();
    for (uint32_t v : t.values) vals.push_back(v);
    return json{{"n", t.n}, {"m", t.m}, {"values", vals}};
}

iso::MultiOutFnTable fn_table_from_json(const json& j) {
    return iso::MultiOutFnTable(j.at("n").get<int>(), j.at("m").get<int>(),
                                j.at("values").get<std::vector<uint32_t>>());
}

json hash_member_to_json(const iso::HashFamily& fam, const Int& index) {
    auto cs = fam.coeffs(index);
    json coeffs = json::array();
    char buf[16];
    for (uint32_t c : cs) {
        std::snprintf(buf, sizeof buf, "%08x", c);
        coeffs.push_back(std::string(buf));
    }
    return json{{"n", fam.n}, {"m", fam.m}, {"t", fam.t}, {"coeffs", coeffs},
                {"modulus_id", f2::gf2w_modulus_id()}};
}

json verify_result_to_json(const iso::VerifyResult& r) {
    json j{{"ok", r.ok},
           {"isolator", isolator_to_json(r.spec)},
           {"uniform_accept", rat_json(r.uniform_accept)},
           {"max_light_mass", rat_json(r.max_light_mass)},
           {"checked", r.checked}};
    if (r.witness) {
        j["witness"] = json{{"source_index", r.witness->source_index},
                            {"measured", rat_json(r.witness->measured)},
                            {"condition1_failed", r.witness->condition1_failed}};
    }
    return j;
}

json bound_report_to_json(const hard::BoundReport& r) {
    json j{{"rhs", rat_json(r.rhs)},
           {"rhs_proof_variant", rat_json(r.rhs_proof_variant)},
           {"vacuous", r.vacuous},
           {"variants_disagree", r.variants_disagree},
           {"min_tv", rat_json(r.min_tv)},
           {"argmin", r.argmin},
           {"checked", r.checked},
           {"violations", r.violations},
           {"certified", r.certified},
           {"per_source_truncated", r.per_source_truncated}};
    if (r.rhs_t1_special) j["rhs_t1_special"] = rat_json(*r.rhs_t1_special);
    json per = json::array();
    for (const auto& s : r.per_source) per.push_back(json::array({s.index, rat_json(s.tv)}));
    j["per_source"] = per;
    return j;
}

json counting_report_to_json(const hard::CountingSearchReport& r) {
    json per = json::array();
    for (const auto& tv : r.per_trial_worst_tv) per.push_back(rat_json(tv));
    char target[32];
    std::snprintf(target, sizeof target, "%.6f", r.claim_target);
    return json{{"class", r.class_desc},
                {"n", r.n},
                {"s", r.s},
                {"trials", r.trials},
                {"best_trial", r.best_trial},
                {"best_support", r.best_support},
                {"best_worst_tv", rat_json(r.best_worst_tv)},
                {"claim_target_approx", std::string(target)},
                {"per_trial_worst_tv", per}};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace isolab::io
