// Prints one PASS/FAIL line per acceptance criterion.  Exit status is 0 when
// every failing criterion was named with --expect-fail.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "support/lasso_oracle.hpp"
#include "support/ltl_suite.hpp"
#include "support/random_model.hpp"
#include "swapmc/bundled.hpp"
#include "swapmc/parser.hpp"
#include "swapmc/validate.hpp"

using namespace swapmc;

namespace {

constexpr double kEscrowSeconds = 10.0;
constexpr double kHtlcSeconds = 120.0;
constexpr std::uint64_t kShrunkProductModelStates = 200;
constexpr int kNaiveBound = 8;
constexpr int kSuitePrefix = 4;
constexpr int kSuitePeriod = 4;
constexpr int kRandomModels = 40;
constexpr std::size_t kRandomStateLimit = 200;
constexpr int kRoundTripModels = 200;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Result {
    bool pass = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        pass = false;
        detail << " [" << why << "]";
    }
};

ModelIR load(const std::string& dir, const std::string& id) { return load_model_file(dir + "/" + id + ".swapmc"); }

Result criterion1(const std::string& dir) {
    Result r;
    const auto t0 = Clock::now();
    const Model m = Model::compile(load(dir, "escrow"));
    const StateGraph g = build_graph(m);
    const Outcome expected[] = {Outcome::Holds, Outcome::Holds, Outcome::Holds, Outcome::Refuted, Outcome::Refuted};
    if (m.specs().size() != 5) r.fail("expected 5 specs");
    for (std::size_t i = 0; i < m.specs().size() && i < 5; ++i) {
        const Verdict v = check(m, g, i);
        r.detail << " #" << i + 1 << "=" << outcome_name(v.outcome);
        if (v.outcome != expected[i]) r.fail("spec " + std::to_string(i + 1) + " outcome");
        if (v.trace && !validate_counterexample(m, m.specs()[i].body, *v.trace).ok())
            r.fail("spec " + std::to_string(i + 1) + " trace");
    }
    const double s = seconds_since(t0);
    r.detail << " time=" << s << "s (budget " << kEscrowSeconds << "s)";
    if (s >= kEscrowSeconds) r.fail("over budget");
    return r;
}

Result criterion2(const std::string& dir, unsigned threads) {
    Result r;
    const auto t0 = Clock::now();
    const Model m = Model::compile(load(dir, "htlc"));
    GraphOptions go;
    go.threads = threads;
    const StateGraph g = build_graph(m, go);
    r.detail << " states=" << g.node_count();
    for (std::size_t i = 0; i < m.specs().size(); ++i) {
        const Verdict v = check(m, g, i);
        r.detail << " #" << i + 1 << "=" << outcome_name(v.outcome) << " product=" << v.stats.product_states;
        if (v.outcome != Outcome::Holds) r.fail("spec " + std::to_string(i + 1) + " outcome");
    }
    if (m.specs().size() != 3) r.fail("expected 3 specs");
    const double s = seconds_since(t0);
    r.detail << " time=" << s << "s (budget " << kHtlcSeconds << "s)";
    if (s >= kHtlcSeconds) r.fail("over budget");
    return r;
}

Result criterion3(const std::string& dir, unsigned threads) {
    Result r;
    const ReversedDerivation d = derive_reversed_manifest(dir, {}, threads);
    for (const auto& p : d.problems) r.fail(p);
    const std::size_t bob = find_spec(Model::compile(load(dir, "htlc-reversed")), "If Bob always cooperates, he is always eventually safe");
    if (bob >= d.checked.size() || d.checked[bob].outcome != Outcome::Refuted) r.fail("Bob spec not refuted");
    else if (!d.traces_valid[bob]) r.fail("Bob trace invalid");
    r.detail << " reversed #" << bob + 1 << "=" << (bob < d.checked.size() ? outcome_name(d.checked[bob].outcome) : "?");
    r.detail << " variant Time 0.." << d.variant.time_hi << " timeouts " << d.variant.timeout_a << "/"
             << d.variant.timeout_b << " states=" << d.variant_states;
    for (std::size_t i = 0; i < d.variant_checked.size(); ++i) {
        r.detail << " #" << i + 1 << " check=" << outcome_name(d.variant_checked[i].outcome)
                 << " naive=" << outcome_name(d.variant_naive[i].outcome);
        if ((d.variant_checked[i].outcome == Outcome::Refuted) != (d.variant_naive[i].outcome == Outcome::Refuted))
            r.fail("naive disagrees on spec " + std::to_string(i + 1));
    }
    if (bob < d.variant_product_model_states.size()) {
        const auto pms = d.variant_product_model_states[bob];
        r.detail << " product-side model states=" << pms << " (bound " << kShrunkProductModelStates << ")";
        if (pms > kShrunkProductModelStates) r.fail("variant above product-side state bound");
    }
    return r;
}

Result criterion4() {
    Result r;
    const auto suite = swapmc::testing::ltl_suite();
    long lassos = 0;
    long disagreements = 0;
    for (const auto& f : suite) {
        const Gba g = ltl_to_gba(f);
        swapmc::testing::for_each_lasso(2, kSuitePrefix, kSuitePeriod, [&](const auto& prefix, const auto& cycle) {
            ++lassos;
            const bool truth = eval_on_lasso(f, prefix, cycle);
            disagreements += gba_accepts_lasso(g, prefix, cycle) != truth;
            disagreements += swapmc::testing::ReferenceLasso(prefix, cycle).holds(f) != truth;
        });
    }
    r.detail << " formulas=" << suite.size() << " lassos=" << lassos << " disagreements=" << disagreements;
    if (suite.size() != 12) r.fail("suite size");
    if (disagreements != 0) r.fail("disagreement");
    return r;
}

Result criterion5() {
    Result r;
    swapmc::testing::ModelGenerator gen(20240);
    int models = 0;
    int specs = 0;
    int naive_refuted = 0;
    int check_refuted = 0;
    int violations = 0;
    while (models < kRandomModels) {
        const Model m = Model::compile(gen.model());
        const StateGraph g = build_graph(m);
        if (g.node_count() > kRandomStateLimit) continue;
        ++models;
        for (std::size_t s = 0; s < m.specs().size(); ++s) {
            const Formula& body = m.specs()[s].body;
            if (temporal_depth_count(body) > 3) continue;
            ++specs;
            const Verdict full = check(m, g, s);
            const Verdict naive = naive_check(m, g, body, kNaiveBound, kNaiveBound, kRandomStateLimit);
            if (naive.outcome == Outcome::Refuted) {
                ++naive_refuted;
                violations += full.outcome != Outcome::Refuted;
            }
            if (full.outcome == Outcome::Refuted) {
                ++check_refuted;
                violations += !full.trace || !validate_counterexample(m, body, *full.trace).ok();
            }
        }
    }
    r.detail << " models=" << models << " specs=" << specs << " naive refutations=" << naive_refuted
             << " check refutations=" << check_refuted << " violations=" << violations;
    if (violations != 0) r.fail("violations");
    return r;
}

bool graphs_equal(const StateGraph& a, const StateGraph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    if (a.initial() != b.initial() || a.transition_count() != b.transition_count()) return false;
    for (std::uint32_t n = 0; n < a.node_count(); ++n) {
        if (a.state(n) != b.state(n)) return false;
        const auto sa = a.successors(n);
        const auto sb = b.successors(n);
        if (!std::equal(sa.begin(), sa.end(), sb.begin(), sb.end())) return false;
    }
    return true;
}

Result criterion6(const std::string& dir) {
    Result r;
    for (const char* id : {"escrow", "htlc"}) {
        const ModelIR ir = load(dir, id);
        const Model m = Model::compile(ir);
        const StateGraph g = build_graph(m);
        std::uint64_t out_of_domain = 0;
        for (std::uint32_t n = 0; n < g.node_count(); ++n) {
            const auto v = g.values(n);
            for (std::size_t k = 0; k < v.size(); ++k)
                out_of_domain += v[k] < m.vars()[k].lo || v[k] > m.vars()[k].hi;
        }
        r.detail << " " << id << " closure violations=" << out_of_domain;
        if (out_of_domain) r.fail(std::string(id) + " domain closure");

        for (unsigned t : {2u, 8u}) {
            GraphOptions go;
            go.threads = t;
            if (!graphs_equal(g, build_graph(m, go))) r.fail(std::string(id) + " differs at " + std::to_string(t) + " threads");
        }

        auto again = parse_model(pretty_print(ir));
        if (!again.ok() || !(*again.value == ir)) r.fail(std::string(id) + " round trip");

        if (std::string(id) == "escrow") {
            auto inv = parse_expr("(depositedA => holdera == Contract) /\\ (depositedB => holderb == Contract)");
            const Expr e = *inv.value;
            std::uint64_t broken = 0;
            for (std::uint32_t n = 0; n < g.node_count(); ++n) broken += !eval_expr(m, e, g.state(n));
            r.detail << " escrow invariant violations=" << broken << "/" << g.node_count();
            if (broken) r.fail("escrow invariant");
        }
    }
    swapmc::testing::ModelGenerator gen(6);
    int trips = 0;
    for (int i = 0; i < kRoundTripModels; ++i) {
        const ModelIR ir = gen.model();
        auto again = parse_model(pretty_print(ir));
        trips += again.ok() && *again.value == ir;
    }
    r.detail << " generated round trips=" << trips << "/" << kRoundTripModels;
    if (trips != kRoundTripModels) r.fail("generated round trip");
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-6"};
    std::string dir = "examples";
    std::vector<int> expect_fail;
    std::vector<int> only;
    unsigned threads = 1;
    app.add_option("--examples", dir, "Directory with the bundled models");
    app.add_option("--expect-fail", expect_fail, "Criteria allowed to fail")->check(CLI::Range(1, 6));
    app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 6));
    app.add_option("--threads", threads, "Graph construction threads")->check(CLI::Range(1u, 256u));
    CLI11_PARSE(app, argc, argv);

    const std::function<Result()> criteria[] = {
        [&] { return criterion1(dir); }, [&] { return criterion2(dir, threads); },
        [&] { return criterion3(dir, threads); }, [] { return criterion4(); },
        [] { return criterion5(); }, [&] { return criterion6(dir); },
    };
    const std::set<int> allowed(expect_fail.begin(), expect_fail.end());
    const std::set<int> selected(only.begin(), only.end());
    int unexpected = 0;
    for (int c = 1; c <= 6; ++c) {
        if (!selected.empty() && !selected.count(c)) continue;
        Result r;
        try {
            r = criteria[c - 1]();
        } catch (const std::exception& e) {
            r.fail(std::string("exception: ") + e.what());
        }
        std::cout << "criterion " << c << ": " << (r.pass ? "PASS" : "FAIL") << r.detail.str() << std::endl;
        if (!r.pass && !allowed.count(c)) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
