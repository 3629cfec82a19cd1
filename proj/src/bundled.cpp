#include "swapmc/bundled.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "swapmc/parser.hpp"
#include "swapmc/validate.hpp"

namespace swapmc {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ModelIR load_model_file(const fs::path& path) {
    const std::string text = read_file(path);
    auto r = parse_model(text);
    if (!r.ok()) {
        std::string msg;
        for (const auto& e : r.errors) msg += path.string() + ":" + e.to_string() + "\n";
        throw LoadError(msg);
    }
    const ValidationReport report = validate_model(*r.value);
    if (!report.ok()) {
        std::string msg;
        for (const auto& d : report.errors())
            msg += path.string() + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) +
                   ": error: " + d.message + "\n";
        throw LoadError(msg);
    }
    return std::move(*r.value);
}

namespace {

Outcome parse_outcome(const std::string& s) {
    if (s == "Holds") return Outcome::Holds;
    if (s == "Refuted") return Outcome::Refuted;
    if (s == "Vacuous") return Outcome::Vacuous;
    throw std::invalid_argument("unknown verdict '" + s + "'");
}

bool pin_constant(Expr& e, const std::string& var, const std::int64_t* value, std::int64_t* found) {
    bool hit = false;
    if (e.op == ExprOp::Eq && e.args.size() == 2) {
        Expr* lhs = &e.args[0];
        Expr* rhs = &e.args[1];
        if (rhs->op == ExprOp::Ident && lhs->op == ExprOp::IntLit) std::swap(lhs, rhs);
        if (lhs->op == ExprOp::Ident && lhs->name == var && rhs->op == ExprOp::IntLit) {
            if (found) *found = rhs->value;
            if (value) rhs->value = *value;
            return true;
        }
    }
    if (e.op != ExprOp::And) return false;
    for (auto& a : e.args) hit = pin_constant(a, var, value, found) || hit;
    return hit;
}

}  // namespace

ModelIR set_init_constant(const ModelIR& ir, const std::string& var, std::int64_t value) {
    ModelIR out = ir;
    if (!out.init_cond || !pin_constant(*out.init_cond, var, &value, nullptr))
        throw std::invalid_argument("init_cond does not pin '" + var + "' to a constant");
    return out;
}

std::int64_t init_constant(const ModelIR& ir, const std::string& var) {
    Expr copy = ir.init_cond.value_or(Expr::boolean(true));
    std::int64_t found = 0;
    if (!pin_constant(copy, var, nullptr, &found))
        throw std::invalid_argument("init_cond does not pin '" + var + "' to a constant");
    return found;
}

ModelIR make_htlc_reversed(const ModelIR& htlc) {
    const auto a = init_constant(htlc, "timeoutA");
    const auto b = init_constant(htlc, "timeoutB");
    return set_init_constant(set_init_constant(htlc, "timeoutA", b), "timeoutB", a);
}

ModelIR shrink_time(const ModelIR& htlc, int hi, int timeout_a, int timeout_b) {
    ModelIR out = set_init_constant(set_init_constant(htlc, "timeoutA", timeout_a), "timeoutB", timeout_b);
    bool found = false;
    for (auto& t : out.types) {
        if (t.kind == TypeDecl::Kind::Range && t.range.name == "Time") {
            t.range.hi = hi;
            found = true;
        }
    }
    if (!found) throw std::invalid_argument("model has no Time range");
    return out;
}

BundledModel load_bundled(const fs::path& dir, const std::string& id) {
    BundledModel b;
    b.id = id;
    b.source = dir / (id + ".swapmc");
    b.manifest = dir / (id + ".expected.json");
    const auto j = nlohmann::json::parse(read_file(b.manifest));
    if (j.at("model").get<std::string>() != id) throw std::invalid_argument(b.manifest.string() + ": model id mismatch");
    for (const auto& e : j.at("expected"))
        b.expected.push_back({e.at("label").get<std::string>(), parse_outcome(e.at("outcome").get<std::string>())});
    return b;
}

std::vector<BundledModel> bundled_models(const fs::path& dir) {
    std::vector<BundledModel> out;
    for (const char* id : kBundledIds) out.push_back(load_bundled(dir, id));
    return out;
}

nlohmann::ordered_json manifest_to_json(const BundledModel& b) {
    nlohmann::ordered_json j;
    j["model"] = b.id;
    j["source"] = b.source.filename().string();
    j["expected"] = nlohmann::ordered_json::array();
    for (const auto& e : b.expected)
        j["expected"].push_back({{"label", normalize_whitespace(e.label)}, {"outcome", outcome_name(e.outcome)}});
    return j;
}

SuiteReport regression_suite(const fs::path& dir, unsigned threads) {
    SuiteReport report;
    for (const auto& b : bundled_models(dir)) {
        const Model m = Model::compile(load_model_file(b.source));
        GraphOptions go;
        go.threads = threads;
        const StateGraph g = build_graph(m, go);
        for (const auto& e : b.expected) {
            std::size_t index = 0;
            try {
                index = find_spec(m, e.label);
            } catch (const std::invalid_argument&) {
                report.mismatches.push_back(b.id + ": no spec labelled \"" + e.label + "\"");
                continue;
            }
            SuiteRow row{b.id, m.specs()[index].label, e.outcome, check(m, g, index), true};
            if (row.verdict.trace) row.trace_valid = validate_counterexample(m, m.specs()[index].body, *row.verdict.trace).ok();
            if (row.verdict.outcome != e.outcome)
                report.mismatches.push_back(b.id + ": \"" + normalize_whitespace(row.label) + "\" expected " +
                                            outcome_name(e.outcome) + ", got " + outcome_name(row.verdict.outcome));
            if (!row.trace_valid)
                report.mismatches.push_back(b.id + ": \"" + normalize_whitespace(row.label) + "\" trace does not validate");
            report.rows.push_back(std::move(row));
        }
        if (b.expected.size() != m.specs().size())
            report.mismatches.push_back(b.id + ": manifest lists " + std::to_string(b.expected.size()) + " of " +
                                        std::to_string(m.specs().size()) + " specs");
    }
    return report;
}

ReversedDerivation derive_reversed_manifest(const fs::path& dir, const ShrunkVariant& variant, unsigned threads) {
    ReversedDerivation d;
    d.variant = variant;
    const ModelIR htlc = load_model_file(dir / "htlc.swapmc");
    GraphOptions go;
    go.threads = threads;

    const Model m = Model::compile(make_htlc_reversed(htlc));
    const StateGraph g = build_graph(m, go);
    d.manifest.id = "htlc-reversed";
    d.manifest.source = dir / "htlc-reversed.swapmc";
    d.manifest.manifest = dir / "htlc-reversed.expected.json";
    for (std::size_t i = 0; i < m.specs().size(); ++i) {
        Verdict v = check(m, g, i);
        bool valid = true;
        if (v.trace) {
            valid = validate_counterexample(m, m.specs()[i].body, *v.trace).ok();
            if (!valid) d.problems.push_back("trace for spec #" + std::to_string(i + 1) + " does not validate");
        }
        d.manifest.expected.push_back({m.specs()[i].label, v.outcome});
        d.checked.push_back(std::move(v));
        d.traces_valid.push_back(valid);
    }

    const Model small = Model::compile(shrink_time(htlc, variant.time_hi, variant.timeout_a, variant.timeout_b));
    const StateGraph sg = build_graph(small, go);
    d.variant_states = sg.node_count();
    for (std::size_t i = 0; i < small.specs().size(); ++i) {
        Verdict full = check(small, sg, i);
        Verdict naive = naive_check(small, sg, small.specs()[i].body, 8, 8, sg.node_count());
        const bool full_refutes = full.outcome == Outcome::Refuted;
        const bool naive_refutes = naive.outcome == Outcome::Refuted;
        if (full_refutes != naive_refutes)
            d.problems.push_back("shrunken variant, spec #" + std::to_string(i + 1) + ": check " +
                                 outcome_name(full.outcome) + " but naive_check " + outcome_name(naive.outcome));
        if (naive.trace && !validate_counterexample(small, small.specs()[i].body, *naive.trace).ok())
            d.problems.push_back("shrunken variant, spec #" + std::to_string(i + 1) + ": naive trace does not validate");
        d.variant_product_model_states.push_back(full.stats.product_model_states);
        d.variant_checked.push_back(std::move(full));
        d.variant_naive.push_back(std::move(naive));
    }
    return d;
}

}  // namespace swapmc
