#include "isolab/cli.hpp"

#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "isolab/hardness.hpp"
#include "isolab/parallel.hpp"

namespace isolab::cli {

using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    const RunConfig& cfg;
    json inputs = json::object();  // name -> {path, fnv64}

    json load(const std::string& key) {
        if (!cfg.params.contains(key)) throw ValidationError("missing required input: --" + key);
        std::string path = cfg.params.at(key).get<std::string>();
        std::string bytes = io::read_text_file(path);
        inputs[key] = json{{"path", path}, {"fnv64", io::fnv1a64_hex(bytes)}};
        try {
            return json::parse(bytes);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("malformed JSON in " + path + ": " + e.what());
        }
    }

    int64_t num(const std::string& key) const {
        if (!cfg.params.contains(key)) throw ValidationError("missing required parameter: --" + key);
        const auto& v = cfg.params.at(key);
        if (v.is_number_integer()) return v.get<int64_t>();
        if (v.is_string()) return std::stoll(v.get<std::string>());
        throw ValidationError("parameter --" + key + " must be an integer");
    }
    int64_t num_or(const std::string& key, int64_t dflt) const {
        return cfg.params.contains(key) ? num(key) : dflt;
    }
    Rat rat(const std::string& key) const {
        if (!cfg.params.contains(key)) throw ValidationError("missing required parameter: --" + key);
        const auto& v = cfg.params.at(key);
        if (v.is_number_integer()) return Rat(static_cast<long>(v.get<int64_t>()));
        if (v.is_string()) return rat_from_string(v.get<std::string>());
        throw ValidationError("parameter --" + key + " must be a rational");
    }
    std::string str_or(const std::string& key, const std::string& dflt) const {
        return cfg.params.contains(key) ? cfg.params.at(key).get<std::string>() : dflt;
    }
    uint64_t seed() const { return static_cast<uint64_t>(num_or("seed", 0)); }
    // --budget overrides the budget recorded in a class file.
    void apply_budget(sources::ClassSpec& cls) const {
        if (cfg.params.contains("budget")) cls.budget = budget();
    }
    // 0 = available parallelism (the default); results are the same at any
    // degree.
    int jobs() const { return static_cast<int>(num_or("jobs", 0)); }
    uint64_t budget() const { return static_cast<uint64_t>(num_or("budget", int64_t{1} << 22)); }
};

struct Outcome {
    json result;
    std::string verdict = "ok";
    int exit_code = kExitOk;
    json csv;  // optional array-of-rows payload for --format csv
};

Outcome cmd_tv(RunContext& ctx) {
    auto P = io::dist_from_json(ctx.load("p"));
    auto Q = io::dist_from_json(ctx.load("q"));
    Rat half_l1 = dist::tv_distance(P, Q);
    Rat pos = dist::tv_distance_positive_part(P, Q);
    Outcome out;
    out.result = json{{"tv", rat_to_string(half_l1)},
                      {"tv_positive_part", rat_to_string(pos)},
                      {"formulations_agree", half_l1 == pos}};
    return out;
}

Outcome cmd_entropy(RunContext& ctx) {
    auto P = io::dist_from_json(ctx.load("dist"));
    auto info = dist::min_entropy(P);
    Outcome out;
    out.result = json{{"max_prob", rat_to_string(info.max_prob)},
                      {"neg_log2_floor", info.floor_neg_log2},
                      {"neg_log2_ceil", info.ceil_neg_log2}};
    if (ctx.cfg.params.contains("k")) {
        KExp k(ctx.rat("k"));
        out.result["k"] = rat_to_string(k.k);
        out.result["has_min_entropy"] = dist::has_min_entropy(P, k);
        out.result["threshold_approx"] = pow2_neg(k).approx;
    }
    return out;
}

Outcome cmd_smooth(RunContext& ctx) {
    auto P = io::dist_from_json(ctx.load("dist"));
    int k = static_cast<int>(ctx.num("k"));
    auto S = dist::smooth(P, k);
    bool count_ok = S.bucket_count <= (uint64_t{1} << (k + 1));
    Rat thr = pow2(-k);
    bool light_ok = true;
    for (uint64_t x = 0; x < P.size() && light_ok; ++x)
        if (P.prob(x) <= thr && S.bucket_mass[S.bucket_of[x]] > thr) light_ok = false;
    json masses = json::array();
    for (const auto& m : S.bucket_mass) masses.push_back(rat_to_string(m));
    Outcome out;
    out.result = json{{"bucket_count", S.bucket_count},
                      {"bucket_of", S.bucket_of},
                      {"bucket_mass", masses},
                      {"count_ok", count_ok},
                      {"light_ok", light_ok}};
    if (!count_ok || !light_ok) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_exact_output(RunContext& ctx) {
    auto src = io::source_from_json(ctx.load("source"));
    Outcome out;
    out.result = json{{"dist", io::dist_to_json(sources::exact_output(src))}};
    return out;
}

Outcome cmd_addr(RunContext& ctx) {
    auto src = io::source_from_json(ctx.load("source"));
    int n = static_cast<int>(ctx.num("n"));
    int t = static_cast<int>(ctx.num("t"));
    Outcome out;
    out.result = json{{"dist", io::dist_to_json(sources::addr_compose(src, n, t))}};
    return out;
}

Outcome cmd_enumerate(RunContext& ctx) {
    auto cls = io::class_from_json(ctx.load("class"));
    cls.budget = ctx.budget();
    sources::ClassEnum en(cls);
    Outcome out;
    out.result = json{{"total_count", en.total_count().get_str()}, {"stream_size", en.size()}};
    if (ctx.num_or("count_only", 0) == 0) {
        uint64_t limit = std::min<uint64_t>(en.size(), static_cast<uint64_t>(ctx.num_or("limit", 64)));
        json members = json::array();
        for (uint64_t i = 0; i < limit; ++i) members.push_back(io::source_to_json(en.at(i)));
        out.result["members"] = members;
    }
    return out;
}

Outcome cmd_verify_isolator(RunContext& ctx) {
    auto spec = io::isolator_from_json(ctx.load("isolator"));
    sources::ClassSpec cls = spec.cls;
    if (ctx.cfg.params.contains("class")) cls = io::class_from_json(ctx.load("class"));
    ctx.apply_budget(cls);
    auto res = iso::verify_isolator(spec.fn, spec.alpha, spec.beta, spec.k, cls, ctx.jobs());
    Outcome out;
    out.result = io::verify_result_to_json(res);
    if (res.witness && !res.witness->condition1_failed) {
        sources::ClassEnum en(cls);
        out.result["witness"]["source"] = io::source_to_json(en.at(res.witness->source_index));
    }
    if (!res.ok) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_search_isolator(RunContext& ctx) {
    auto cls = io::class_from_json(ctx.load("class"));
    ctx.apply_budget(cls);
    iso::HashFamily fam(static_cast<int>(ctx.num("n")), static_cast<int>(ctx.num("m")),
                        static_cast<int>(ctx.num("t")));
    auto res = iso::search_isolator(fam, ctx.rat("alpha"), ctx.rat("beta"), KExp(ctx.rat("k")), cls,
                                    ctx.budget(), ctx.jobs());
    Outcome out;
    out.result = json{{"found", res.found},
                      {"members_tried", res.stats.members_tried},
                      {"condition1_failures", res.stats.condition1_failures},
                      {"condition2_failures", res.stats.condition2_failures}};
    if (res.found) {
        out.result["member"] = io::hash_member_to_json(fam, res.member_index);
        out.result["member_index"] = res.member_index.get_str();
        out.result["isolator"] = io::isolator_to_json(res.verified->spec);
    } else {
        out.verdict = "exhausted";
        out.exit_code = kExitBudget;
    }
    return out;
}

Outcome cmd_input_reduce(RunContext& ctx) {
    auto f = io::poly_map_from_json(ctx.load("poly"));
    int eps_log2 = static_cast<int>(ctx.num("eps_log2"));
    auto res = iso::input_reduce(f, eps_log2, ctx.budget(), ctx.seed());
    json rows = json::array();
    for (int i = 0; i < res.A.rows(); ++i) rows.push_back(f2::BitVec(res.A.row(i), res.A.cols()).to_string());
    Outcome out;
    out.result = json{{"ell", res.ell},
                      {"A_rows", rows},
                      {"b", res.b.to_string()},
                      {"achieved_tv", rat_to_string(res.achieved_tv)},
                      {"success", res.success},
                      {"candidates_tried", res.candidates_tried}};
    if (!res.success) {
        out.verdict = "exhausted";
        out.exit_code = kExitBudget;
    }
    return out;
}

Outcome cmd_lift(RunContext& ctx) {
    auto spec = io::isolator_from_json(ctx.load("isolator"));
    auto lifted = iso::lift_isolator(spec, static_cast<int>(ctx.num("k")));
    Outcome out;
    out.result = json{{"isolator", io::isolator_to_json(lifted)}};
    return out;
}

Outcome cmd_iso_from_rext(RunContext& ctx) {
    auto rext = io::fn_table_from_json(ctx.load("rext"));
    auto cls = io::class_from_json(ctx.load("class"));
    f2::BitVec z(0, rext.m);  // default target output 0^m
    if (ctx.cfg.params.contains("z")) z = f2::BitVec::from_string(ctx.cfg.params.at("z").get<std::string>());
    auto spec = iso::iso_from_rext(rext, z, ctx.rat("eps"), ctx.rat("delta"), KExp(ctx.rat("k")), cls);
    Outcome out;
    out.result = json{{"isolator", io::isolator_to_json(spec)}};
    return out;
}

Outcome cmd_mixture_bound(RunContext& ctx) {
    auto mix = io::mixture_from_json(ctx.load("mixture"));
    auto ext = io::fn_table_from_json(ctx.load("ext"));
    std::string tags = ctx.cfg.params.at("tags").get<std::string>();
    if (tags.size() != mix.size()) throw ValidationError("tag string length must match part count");
    std::vector<bool> constant_tags;
    for (char ch : tags) {
        if (ch == 'c')
            constant_tags.push_back(true);
        else if (ch == 'h')
            constant_tags.push_back(false);
        else
            throw ValidationError("tags must be 'c' (constant) or 'h' (high min-entropy)");
    }
    auto rep = iso::mixture_isolator_bound(ext, mix, constant_tags, ctx.rat("eps"), KExp(ctx.rat("k")),
                                           KExp(ctx.rat("k_prime")), ctx.rat("gamma"));
    Outcome out;
    out.result = json{{"bound", rat_to_string(rep.bound)},
                      {"measured", rat_to_string(rep.measured)},
                      {"holds", rep.holds}};
    if (!rep.holds) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_two_source(RunContext& ctx) {
    auto X = io::dist_from_json(ctx.load("x"));
    auto Y = io::dist_from_json(ctx.load("y"));
    auto ext = io::fn_table_from_json(ctx.load("ext"));
    uint64_t z = 0;
    if (ctx.cfg.params.contains("z")) z = f2::BitVec::from_string(ctx.cfg.params.at("z").get<std::string>()).bits;
    auto rep = iso::two_source_robust_bound(X, Y, ext, static_cast<int>(ctx.num("k")),
                                            static_cast<int>(ctx.num("k0")), static_cast<int>(ctx.num("k1")),
                                            static_cast<int>(ctx.num("k2")), ctx.rat("eps"), z);
    Outcome out;
    out.result = json{{"measured", rat_to_string(rep.measured)},
                      {"bound", rat_to_string(rep.bound)},
                      {"holds", rep.holds}};
    if (!rep.holds) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_comm_mixture(RunContext& ctx) {
    auto src = io::source_from_json(ctx.load("source"));
    const auto* comm = std::get_if<sources::CommSpec>(&src.body);
    if (!comm) throw ValidationError("source must be a communication protocol");
    auto mix = sources::comm_to_mixture(*comm);
    bool parts_ok = mix.size() <= (size_t{1} << comm->cost);
    bool equal = dist::mixture_collapse(mix) == sources::exact_output(src);
    Outcome out;
    out.result = json{{"mixture", io::mixture_to_json(mix)},
                      {"part_count", mix.size()},
                      {"part_count_ok", parts_ok},
                      {"collapse_equals_exact_output", equal}};
    if (!parts_ok || !equal) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_robp_cut(RunContext& ctx) {
    auto src = io::source_from_json(ctx.load("source"));
    const auto* robp = std::get_if<sources::RobpSpec>(&src.body);
    if (!robp) throw ValidationError("source must be a branching program");
    int cut = static_cast<int>(ctx.num("cut"));
    auto comm = sources::robp_partition_to_comm(*robp, cut);
    bool cost_ok = comm.cost <= robp->s + 1;
    bool equal = sources::exact_output(sources::SourceSpec{comm}) == sources::exact_output(src);
    Outcome out;
    out.result = json{{"comm", io::source_to_json(sources::SourceSpec{comm})},
                      {"cost", comm.cost},
                      {"cost_ok", cost_ok},
                      {"output_equal", equal}};
    if (!cost_ok || !equal) {
        out.verdict = "violation";
        out.exit_code = kExitViolation;
    }
    return out;
}

Outcome cmd_build_hard_dist(RunContext& ctx) {
    auto spec = io::isolator_from_json(ctx.load("isolator"));
    int t = static_cast<int>(ctx.num("t"));
    auto hd = hard::build_hard_dist(spec.fn, t);
    Outcome out;
    out.result = json{{"n", hd.n}, {"t", hd.t}, {"dist", io::dist_to_json(hd.D)}};
    return out;
}

Outcome cmd_bound(RunContext& ctx) {
    Rat alpha = ctx.rat("alpha"), beta = ctx.rat("beta");
    int k = static_cast<int>(ctx.num("k"));
    int n = static_cast<int>(ctx.num("n"));
    int t = static_cast<int>(ctx.num("t"));
    Outcome out;
    out.result = json{{"rhs", rat_to_string(hard::theorem_bound(alpha, beta, k, n, t))},
                      {"rhs_proof_variant", rat_to_string(hard::theorem_bound_proof_variant(alpha, beta, k, n, t))}};
    if (t == 1) out.result["rhs_t1_special"] = rat_to_string(hard::theorem_bound_t1_special(alpha, beta, k, n));
    return out;
}

Outcome cmd_certify_theorem(RunContext& ctx) {
    auto spec = io::isolator_from_json(ctx.load("isolator"));
    auto cls = io::class_from_json(ctx.load("class"));
    ctx.apply_budget(cls);
    spec.cls.budget = cls.budget;
    int t = static_cast<int>(ctx.num("t"));
    auto rep = hard::certify_theorem(spec, t, cls, ctx.jobs(),
                                     static_cast<uint64_t>(ctx.num_or("per_source_cap", int64_t{1} << 21)));
    Outcome out;
    out.result = io::bound_report_to_json(rep);
    out.verdict = rep.certified ? "certified" : "violation";
    out.exit_code = rep.certified ? kExitOk : kExitViolation;
    json rows = json::array();
    rows.push_back(json::array({"source_index", "tv"}));
    for (const auto& s : rep.per_source) rows.push_back(json::array({s.index, rat_to_string(s.tv)}));
    out.csv = rows;
    return out;
}

Outcome cmd_counting_search(RunContext& ctx) {
    auto cls = io::class_from_json(ctx.load("class"));
    ctx.apply_budget(cls);
    auto rep = hard::counting_search(cls, static_cast<int>(ctx.num("n")), static_cast<uint64_t>(ctx.num("s")),
                                     static_cast<uint64_t>(ctx.num("trials")), ctx.seed(), ctx.jobs());
    Outcome out;
    out.result = io::counting_report_to_json(rep);
    json rows = json::array();
    rows.push_back(json::array({"trial", "worst_tv"}));
    for (size_t i = 0; i < rep.per_trial_worst_tv.size(); ++i)
        rows.push_back(json::array({i, rat_to_string(rep.per_trial_worst_tv[i])}));
    out.csv = rows;
    return out;
}

std::string to_csv(const json& rows) {
    std::string text;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            if (row[i].is_string())
                text += row[i].get<std::string>();
            else
                text += row[i].dump();
        }
        text += '\n';
    }
    return text;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& fallback_out) {
    RunContext ctx{cfg};
    Outcome out;
    try {
        if (cfg.command == "tv")
            out = cmd_tv(ctx);
        else if (cfg.command == "entropy")
            out = cmd_entropy(ctx);
        else if (cfg.command == "smooth")
            out = cmd_smooth(ctx);
        else if (cfg.command == "exact-output")
            out = cmd_exact_output(ctx);
        else if (cfg.command == "addr")
            out = cmd_addr(ctx);
        else if (cfg.command == "enumerate")
            out = cmd_enumerate(ctx);
        else if (cfg.command == "verify-isolator")
            out = cmd_verify_isolator(ctx);
        else if (cfg.command == "search-isolator")
            out = cmd_search_isolator(ctx);
        else if (cfg.command == "input-reduce")
            out = cmd_input_reduce(ctx);
        else if (cfg.command == "lift")
            out = cmd_lift(ctx);
        else if (cfg.command == "iso-from-rext")
            out = cmd_iso_from_rext(ctx);
        else if (cfg.command == "mixture-bound")
            out = cmd_mixture_bound(ctx);
        else if (cfg.command == "two-source")
            out = cmd_two_source(ctx);
        else if (cfg.command == "comm-mixture")
            out = cmd_comm_mixture(ctx);
        else if (cfg.command == "robp-cut")
            out = cmd_robp_cut(ctx);
        else if (cfg.command == "build-hard-dist")
            out = cmd_build_hard_dist(ctx);
        else if (cfg.command == "bound")
            out = cmd_bound(ctx);
        else if (cfg.command == "certify-theorem")
            out = cmd_certify_theorem(ctx);
        else if (cfg.command == "counting-search")
            out = cmd_counting_search(ctx);
        else
            throw ValidationError("unknown command: " + cfg.command);
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    // The embedded config excludes pure execution details (output path,
    // worker count) so reruns at any parallelism degree are byte-identical.
    json resolved = cfg.params;
    resolved.erase("out");
    resolved.erase("jobs");
    json envelope{{"tool", "isolab"},
                  {"version", kVersion},
                  {"command", cfg.command},
                  {"config", resolved},
                  {"inputs", ctx.inputs},
                  {"verdict", out.verdict},
                  {"result", out.result}};
    std::string text = envelope.dump(2);
    text += '\n';

    std::string out_path = ctx.str_or("out", "");
    if (!out_path.empty())
        io::write_text_file(out_path, text);
    else
        fallback_out << text;

    if (ctx.str_or("format", "json") == "csv") {
        if (out.csv.is_null()) throw ValidationError("this command has no CSV export");
        if (out_path.empty()) throw ValidationError("--format csv requires --out");
        io::write_text_file(out_path + ".csv", to_csv(out.csv));
    }
    return out.exit_code;
}

int main_entry(int argc, const char* const* argv) {
    CLI::App app{"isolab: exact isolator and sampling-hardness laboratory"};
    app.fallthrough(true);
    app.require_subcommand(0, 1);

    // Shared option surface; each command reads the parameters it needs and
    // validates before any work starts. --config values override flags.
    std::map<std::string, std::string> strs;
    std::map<std::string, int64_t> nums;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; overrides flags");
    for (const char* key : {"p", "q", "dist", "source", "class", "isolator", "poly", "rext",
                            "mixture", "ext", "x", "y", "out", "format", "z", "tags", "alpha",
                            "beta", "eps", "delta", "gamma", "k", "k_prime"})
        app.add_option(std::string("--") + key, strs[key]);
    for (const char* key : {"n", "m", "t", "k0", "k1", "k2", "s", "cut", "trials", "eps_log2",
                            "limit", "count_only", "seed", "jobs", "budget", "per_source_cap"})
        app.add_option(std::string("--") + key, nums[key]);

    std::vector<std::string> commands = {"tv", "entropy", "smooth", "exact-output", "addr",
                                         "enumerate", "verify-isolator", "search-isolator",
                                         "input-reduce", "lift", "iso-from-rext", "mixture-bound",
                                         "two-source", "comm-mixture", "robp-cut", "build-hard-dist",
                                         "bound", "certify-theorem", "counting-search"};
    for (const auto& c : commands) app.add_subcommand(c, "");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    RunConfig cfg;
    for (const auto* sub : app.get_subcommands())
        cfg.command = sub->get_name();
    if (cfg.command.empty()) {
        std::cerr << app.help() << "\n";
        return kExitValidation;
    }

    cfg.params = json::object();
    for (const auto& [key, val] : strs)
        if (app.get_option("--" + key)->count() > 0) cfg.params[key] = val;
    for (const auto& [key, val] : nums)
        if (app.get_option("--" + key)->count() > 0) cfg.params[key] = val;

    // "k" may be a rational string; numeric commands parse it themselves.
    try {
        if (!config_path.empty()) {
            json file_cfg = io::load_json_file(config_path);
            if (file_cfg.contains("command")) cfg.command = file_cfg.at("command").get<std::string>();
            for (auto it = file_cfg.begin(); it != file_cfg.end(); ++it)
                if (it.key() != "command") cfg.params[it.key()] = it.value();
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        return run(cfg, std::cout);
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return kExitBudget;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace isolab::cli
