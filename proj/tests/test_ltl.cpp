#include <doctest.h>

#include <random>

#include "support/lasso_oracle.hpp"
#include "support/ltl_suite.hpp"
#include "swapmc/ltl.hpp"
#include "swapmc/parser.hpp"

using namespace swapmc;
using swapmc::testing::for_each_lasso;
using swapmc::testing::ReferenceLasso;

namespace {

Formula bound(const std::string& text) {
    auto r = parse_formula(text);
    REQUIRE_MESSAGE(r.ok(), text);
    std::vector<Expr> table = {Expr::ident("p"), Expr::ident("q")};
    return bind_atoms(*r.value, table);
}

Valuation pq(bool p, bool q) { return Valuation{p, q}; }

// Random formula over two atoms with at most `temporal` temporal operators.
Formula random_formula(std::mt19937_64& rng, int depth, int& temporal) {
    std::uniform_int_distribution<int> pick(0, 11);
    const int k = depth <= 0 ? pick(rng) % 3 : pick(rng);
    auto atom = [&](int id) { return Formula::atom(Expr::ident(id ? "q" : "p"), id); };
    auto temporal_ok = [&] { return temporal > 0 ? (--temporal, true) : false; };
    switch (k) {
    case 0: return atom(0);
    case 1: return atom(1);
    case 2: return Formula::truth(rng() % 4 != 0);
    case 3: return Formula::unary(LtlOp::Not, random_formula(rng, depth - 1, temporal));
    case 4: return Formula::binary(LtlOp::And, random_formula(rng, depth - 1, temporal), random_formula(rng, depth - 1, temporal));
    case 5: return Formula::binary(LtlOp::Or, random_formula(rng, depth - 1, temporal), random_formula(rng, depth - 1, temporal));
    case 6:
        return Formula::binary(LtlOp::Implies, random_formula(rng, depth - 1, temporal),
                               random_formula(rng, depth - 1, temporal));
    default: break;
    }
    if (!temporal_ok()) return atom(static_cast<int>(rng() % 2));
    switch (k) {
    case 7: return Formula::unary(LtlOp::Next, random_formula(rng, depth - 1, temporal));
    case 8: return Formula::unary(LtlOp::Globally, random_formula(rng, depth - 1, temporal));
    case 9: return Formula::unary(LtlOp::Finally, random_formula(rng, depth - 1, temporal));
    case 10:
        return Formula::binary(LtlOp::Until, random_formula(rng, depth - 1, temporal),
                               random_formula(rng, depth - 1, temporal));
    default:
        return Formula::binary(LtlOp::Release, random_formula(rng, depth - 1, temporal),
                               random_formula(rng, depth - 1, temporal));
    }
}

}  // namespace

TEST_CASE("normalize examples") {
    CHECK(normalize(bound("A(neg F p)")) == bound("A(G neg p)"));
    CHECK(normalize(bound("A(neg G p)")) == bound("A(F neg p)"));
    CHECK(normalize(bound("A(neg (p /\\ q))")) == bound("A(neg p \\/ neg q)"));
    CHECK(normalize(bound("A(p => q)")) == bound("A(neg p \\/ q)"));
    CHECK(is_nnf(normalize(bound("A(neg (p U q))"))));
    CHECK(normalize(bound("A(neg (p U q))")).op() == LtlOp::Release);
    CHECK(normalize(bound("A(neg X p)")) == bound("A(X neg p)"));
}

TEST_CASE("weak until desugars at parse time") {
    CHECK(bound("A(p W q)") == bound("A((p U q) \\/ G(p /\\ neg q))"));
}

TEST_CASE("eval_on_lasso examples") {
    const auto gp = bound("A(G p)");
    CHECK(eval_on_lasso(gp, {}, {pq(true, false)}));
    const auto fp = bound("A(F p)");
    CHECK_FALSE(eval_on_lasso(fp, {pq(false, false)}, {pq(false, false)}));
    const auto until = bound("A(p U q)");
    CHECK(eval_on_lasso(until, {pq(true, false)}, {pq(false, true)}));
    CHECK_FALSE(eval_on_lasso(until, {pq(false, false)}, {pq(false, true)}));
    CHECK_FALSE(eval_on_lasso(until, {}, {pq(true, false)}));
    CHECK(eval_on_lasso(bound("A(G F p)"), {pq(false, false)}, {pq(false, false), pq(true, false)}));
    CHECK_FALSE(eval_on_lasso(bound("A(F G p)"), {}, {pq(false, false), pq(true, false)}));
    CHECK(eval_on_lasso(bound("A(X X p)"), {pq(false, false)}, {pq(false, false), pq(true, false)}));
}

TEST_CASE("p U q on the sample lasso stays true under unrolling") {
    const auto f = bound("A(p U q)");
    const std::vector<Valuation> prefix = {pq(true, false)};
    const std::vector<Valuation> cycle = {pq(false, true)};
    for (int periods = 1; periods <= 8; ++periods) {
        std::vector<Valuation> unrolled_prefix = prefix;
        for (int k = 0; k < periods; ++k) unrolled_prefix.insert(unrolled_prefix.end(), cycle.begin(), cycle.end());
        CHECK(eval_on_lasso(f, unrolled_prefix, cycle));
        CHECK(ReferenceLasso(unrolled_prefix, cycle).holds(f));
    }
    CHECK(eval_on_lasso(f, prefix, cycle));
}

TEST_CASE("eval_on_lasso matches the recursive reference on random formulas") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        int temporal = 4;
        const Formula f = random_formula(rng, 4, temporal);
        for_each_lasso(2, 2, 2, [&](const auto& prefix, const auto& cycle) {
            const bool expected = ReferenceLasso(prefix, cycle).holds(f);
            REQUIRE_MESSAGE(eval_on_lasso(f, prefix, cycle) == expected, to_string(f));
        });
    }
}

TEST_CASE("normalize preserves semantics on bounded lassos") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        int temporal = 4;
        const Formula f = random_formula(rng, 4, temporal);
        const Formula n = normalize(f);
        REQUIRE(is_nnf(n));
        for_each_lasso(2, 3, 3, [&](const auto& prefix, const auto& cycle) {
            REQUIRE_MESSAGE(eval_on_lasso(f, prefix, cycle) == eval_on_lasso(n, prefix, cycle), to_string(f));
        });
    }
}

TEST_CASE("GBA examples") {
    SUBCASE("False has an empty language") {
        const Gba g = ltl_to_gba(Formula::truth(false));
        CHECK(g.initial.empty());
    }
    SUBCASE("True accepts every bounded lasso") {
        const Gba g = ltl_to_gba(Formula::truth(true));
        for_each_lasso(2, 2, 2, [&](const auto& prefix, const auto& cycle) {
            CHECK(gba_accepts_lasso(g, prefix, cycle));
        });
    }
    SUBCASE("G p and p U q agree with the evaluator up to prefix 4 and period 4") {
        for (const char* text : {"A(G p)", "A(p U q)"}) {
            const Formula f = bound(text);
            const Gba g = ltl_to_gba(f);
            for_each_lasso(2, 4, 4, [&](const auto& prefix, const auto& cycle) {
                REQUIRE(gba_accepts_lasso(g, prefix, cycle) == eval_on_lasso(f, prefix, cycle));
            });
        }
    }
    SUBCASE("one acceptance set per eventuality") {
        CHECK(ltl_to_gba(bound("A(G p)")).acceptance.empty());
        CHECK(ltl_to_gba(bound("A(F p)")).acceptance.size() == 1);
        CHECK(ltl_to_gba(bound("A(p U q)")).acceptance.size() == 1);
        CHECK(ltl_to_gba(bound("A(G F p /\\ G F q)")).acceptance.size() == 2);
    }
    SUBCASE("labels are consistent literal sets") {
        for (const auto& f : swapmc::testing::ltl_suite()) {
            const Gba g = ltl_to_gba(normalize(Formula::unary(LtlOp::Not, f)));
            for (const auto& n : g.nodes) {
                for (std::size_t i = 1; i < n.label.size(); ++i) CHECK(n.label[i - 1].atom != n.label[i].atom);
            }
            for (const auto& set : g.acceptance)
                for (auto q : set) CHECK(q < g.nodes.size());
        }
    }
}

TEST_CASE("GBA of random formulas agrees with the evaluator") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 150; ++trial) {
        int temporal = 3;
        const Formula f = random_formula(rng, 4, temporal);
        const Gba g = ltl_to_gba(f);
        for_each_lasso(2, 2, 3, [&](const auto& prefix, const auto& cycle) {
            REQUIRE_MESSAGE(gba_accepts_lasso(g, prefix, cycle) == eval_on_lasso(f, prefix, cycle), to_string(f));
        });
    }
}

TEST_CASE("GBA DOT export names every node") {
    const Gba g = ltl_to_gba(bound("A(p U q)"));
    const std::string dot = to_dot(g);
    CHECK(dot.find("digraph") == 0);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) CHECK(dot.find("q" + std::to_string(q) + " [") != std::string::npos);
}

TEST_CASE("the twelve-formula suite agrees with the evaluator up to prefix 4 and period 4") {
    const auto suite = swapmc::testing::ltl_suite();
    REQUIRE(suite.size() == 12);
    for (std::size_t i = 0; i < suite.size(); ++i) {
        const Formula& f = suite[i];
        const Gba g = ltl_to_gba(f);
        const Gba neg = ltl_to_gba(normalize(Formula::unary(LtlOp::Not, f)));
        long disagreements = 0;
        for_each_lasso(2, 4, 4, [&](const auto& prefix, const auto& cycle) {
            const bool truth = ReferenceLasso(prefix, cycle).holds(f);
            disagreements += eval_on_lasso(f, prefix, cycle) != truth;
            disagreements += gba_accepts_lasso(g, prefix, cycle) != truth;
            disagreements += gba_accepts_lasso(neg, prefix, cycle) == truth;
        });
        CHECK_MESSAGE(disagreements == 0, swapmc::testing::ltl_suite_text()[i]);
    }
}
