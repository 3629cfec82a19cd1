#include <doctest.h>

#include <functional>
#include <map>
#include <set>

#include "support/models.hpp"
#include "support/random_model.hpp"
#include "support/reference_exec.hpp"
#include "swapmc/bundled.hpp"
#include "swapmc/parser.hpp"
#include "swapmc/semantics.hpp"

using namespace swapmc;
using namespace swapmc::testing;

namespace {

Expr expr(const std::string& text) {
    auto r = parse_expr(text);
    REQUIRE_MESSAGE(r.ok(), text);
    return *r.value;
}

State make_state(const Model& m, const std::map<std::string, std::string>& values) {
    State s;
    s.values.assign(m.vars().size(), 0);
    for (const auto& [name, text] : values) {
        const int v = m.var_index(name);
        REQUIRE(v >= 0);
        const auto& info = m.vars()[v];
        if (info.type.kind == ValueType::Kind::Enum) {
            auto it = std::find(info.constants.begin(), info.constants.end(), text);
            REQUIRE(it != info.constants.end());
            s.values[v] = static_cast<Value>(it - info.constants.begin());
        } else if (info.type.kind == ValueType::Kind::Bool) {
            s.values[v] = text == "True" ? 1 : 0;
        } else {
            s.values[v] = std::stoi(text);
        }
    }
    return s;
}

// Every total assignment of the model's variables.
void for_each_assignment(const Model& m, const std::function<void(const State&)>& fn) {
    State s;
    s.values.assign(m.vars().size(), 0);
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == m.vars().size()) {
            fn(s);
            return;
        }
        for (Value x = m.vars()[k].lo; x <= m.vars()[k].hi; ++x) {
            s.values[k] = x;
            rec(k + 1);
        }
    };
    rec(0);
}

std::set<State> brute_force_initial(const Model& m) {
    const CExpr init = m.compile_expr(m.ir().init_cond.value_or(Expr::boolean(true)));
    std::set<State> out;
    for_each_assignment(m, [&](const State& s) {
        if (eval(m, init, s)) out.insert(s);
    });
    return out;
}

std::set<std::string> names(const Model& m, int agent, const std::vector<int>& acts) {
    std::set<std::string> out;
    for (int a : acts) out.insert(m.agents()[agent].actions[a]);
    return out;
}

ActionProfile profile_of(const Model& m, const std::map<std::string, std::string>& chosen) {
    ActionProfile p;
    for (std::size_t a = 0; a < m.agents().size(); ++a) {
        const auto& name = chosen.at(m.agents()[a].name);
        p.actions.push_back(static_cast<std::uint16_t>(m.action_index(static_cast<int>(a), name)));
    }
    return p;
}

void require_same_graph(const StateGraph& a, const StateGraph& b) {
    REQUIRE(a.node_count() == b.node_count());
    CHECK(a.edge_count() == b.edge_count());
    CHECK(a.transition_count() == b.transition_count());
    CHECK(a.initial() == b.initial());
    for (std::uint32_t n = 0; n < a.node_count(); ++n) {
        REQUIRE(a.state(n) == b.state(n));
        const auto sa = a.successors(n);
        const auto sb = b.successors(n);
        REQUIRE(std::vector<std::uint32_t>(sa.begin(), sa.end()) == std::vector<std::uint32_t>(sb.begin(), sb.end()));
    }
}

void check_against_reference(const Model& m) {
    const StateGraph g = build_graph(m);
    const RefGraph ref = ref_closure(m);
    REQUIRE(g.node_count() == ref.nodes.size());
    REQUIRE(g.edge_count() == ref.edges.size());
    for (const auto& s : ref.nodes) REQUIRE(g.find(s) >= 0);
    for (const auto& [s, t] : ref.edges) {
        const auto succ = g.successors(static_cast<std::uint32_t>(g.find(s)));
        REQUIRE(std::find(succ.begin(), succ.end(), static_cast<std::uint32_t>(g.find(t))) != succ.end());
    }
}

}  // namespace

TEST_CASE("eval_expr examples") {
    const Model m = example_model("escrow");
    const auto init = initial_states(m);
    REQUIRE_FALSE(init.empty());
    CHECK(eval_expr(m, expr("holdera == AliceH"), init.front()) == 1);
    CHECK(eval_expr(m, expr("neg True"), init.front()) == 0);
    CHECK(eval_expr(m, expand_defines(expr("swapped"), m.ir()), init.front()) == 0);
}

TEST_CASE("Time arithmetic saturates at both bounds") {
    const Model m = example_model("htlc");
    const int time = m.var_index("time");
    State s = initial_states(m).front();
    for (int k : {1, 2, 5}) {
        for (Value t = 0; t <= 20; ++t) {
            s.values[time] = t;
            const auto up = Expr::binary(ExprOp::Add, Expr::ident("time"), Expr::integer(k));
            const auto down = Expr::binary(ExprOp::Sub, Expr::ident("time"), Expr::integer(k));
            CHECK(eval_expr(m, up, s) == std::max(0, std::min(20, t + k)));
            CHECK(eval_expr(m, down, s) == std::max(0, std::min(20, t - k)));
        }
    }
}

TEST_CASE("strict arithmetic raises instead of saturating") {
    EvalOptions strict;
    strict.strict_arithmetic = true;
    const Model m = Model::compile(example_ir("htlc"), strict);
    State s = initial_states(m).front();
    s.values[m.var_index("time")] = 20;
    CHECK_THROWS_AS(eval_expr(m, expr("time + 1 > 3"), s), RangeError);
    s.values[m.var_index("time")] = 19;
    CHECK(eval_expr(m, expr("time + 1 > 3"), s) == 1);
}

TEST_CASE("escrow initial states match a brute-force filter") {
    const Model m = example_model("escrow");
    const auto init = initial_states(m);
    const auto brute = brute_force_initial(m);
    CHECK(init.size() == 18);
    CHECK(std::set<State>(init.begin(), init.end()) == brute);
    for (const auto& s : init) {
        CHECK(m.format_value(m.var_index("holdera"), s.values[m.var_index("holdera")]) == "AliceH");
        CHECK(s.values[m.var_index("done")] == 0);
    }
}

TEST_CASE("htlc initial states match a brute-force filter") {
    // Time cut to 0..8 keeps the full product enumerable; both timeouts stay in range.
    const ModelIR ir = shrink_time(example_ir("htlc"), 8, 8, 6);
    const Model m = Model::compile(ir);
    const auto init = initial_states(m);
    CHECK(init.size() == 9);
    CHECK(std::set<State>(init.begin(), init.end()) == brute_force_initial(m));
    CHECK(initial_states(example_model("htlc")).size() == 9);
}

TEST_CASE("init_cond = False has no initial states") {
    const Model m = compile_text("x : Bool\ninit_cond = False\ntransitions skip\n");
    CHECK(initial_states(m).empty());
    CHECK_THROWS_AS(build_graph(m), std::invalid_argument);
}

TEST_CASE("escrow enabled actions") {
    const Model m = example_model("escrow");
    const int alice = m.agent_index("Alice");
    const auto base = std::map<std::string, std::string>{
        {"holdera", "AliceH"}, {"holderb", "BobH"}, {"depositedA", "False"}, {"depositedB", "False"},
        {"strategyB", "Cooperate"}, {"turn", "AliceP"}};
    auto with = [&](const std::string& strategy) {
        auto v = base;
        v["strategyA"] = strategy;
        return make_state(m, v);
    };
    CHECK(names(m, alice, enabled_actions(m, alice, with("Cooperate"))) == std::set<std::string>{"Deposit"});
    CHECK(names(m, alice, enabled_actions(m, alice, with("Random"))) ==
          std::set<std::string>{"Deposit", "Cancel", "Finalize", "Skip", "GiveToOther"});
    CHECK(names(m, alice, enabled_actions(m, alice, with("Recover"))) == std::set<std::string>{"Skip"});
    CHECK(enabled_action_names(m, "Alice", with("Recover")) == std::vector<std::string>{"Skip"});
}

TEST_CASE("protocol without a matching rule or otherwise falls back to Skip") {
    const Model m = compile_text(R"(
x : Bool
init_cond = True
agent P "p" (x)
transitions skip
protocol "p" (y : Bool)
begin
do
  y -> <<Go>>
od
end
)");
    State s;
    s.values = {0};
    CHECK(enabled_action_names(m, "P", s) == std::vector<std::string>{"Skip"});
    s.values = {1};
    CHECK(enabled_action_names(m, "P", s) == std::vector<std::string>{"Go"});
}

TEST_CASE("exec_statement examples") {
    const Model m = compile_text("x : Bool\ninit_cond = True\ntransitions skip\n");
    State s;
    s.values = {0};
    auto nondet = parse_ok("x : Bool\ninit_cond = True\ntransitions [[ x | True ]]\n").transitions;
    CHECK(exec_statement(m, *nondet, s, {}).size() == 2);
    const auto same = exec_statement(m, Statement::skip(), s, {});
    REQUIRE(same.size() == 1);
    CHECK(same[0] == s);
}

TEST_CASE("escrow: Alice deposits, 18 successors") {
    const Model m = example_model("escrow");
    const State s = make_state(m, {{"holdera", "AliceH"},
                                   {"holderb", "BobH"},
                                   {"strategyA", "Cooperate"},
                                   {"strategyB", "Cooperate"},
                                   {"turn", "AliceP"},
                                   {"playedCoopA", "True"},
                                   {"playedCoopB", "True"}});
    const ActionProfile p = profile_of(m, {{"Alice", "Deposit"}, {"Bob", "Deposit"}});
    const auto out = exec_statement(m, *m.ir().transitions, s, p);
    CHECK(out.size() == 18);
    const int holdera = m.var_index("holdera");
    for (const auto& t : out) {
        CHECK(t.values[m.var_index("depositedA")] == 1);
        CHECK(m.format_value(holdera, t.values[holdera]) == "Contract");
    }
    CHECK(std::set<State>(out.begin(), out.end()) == ref_exec(m, *m.ir().transitions, s, p));
    const auto compiled = exec_statement(m, m.transitions(), s, p);
    CHECK(std::set<State>(compiled.begin(), compiled.end()) == std::set<State>(out.begin(), out.end()));
}

TEST_CASE("escrow: both strategies Random gives 25 profiles") {
    const Model m = example_model("escrow");
    const State s = make_state(m, {{"holdera", "AliceH"},
                                   {"holderb", "BobH"},
                                   {"strategyA", "Random"},
                                   {"strategyB", "Random"},
                                   {"turn", "BobP"}});
    CHECK(all_profiles(m, s).size() == 25);
    std::set<ActionProfile> seen;
    for (const auto& t : successors(m, s)) seen.insert(t.profile);
    CHECK(seen.size() == 25);
}

TEST_CASE("skip transitions pair every profile with the same state") {
    const Model m = compile_text(R"(
type Color = {Red, Green, Blue}
c : Color
init_cond = True
agent P "p" (c)
agent Q "p" (c)
transitions skip
protocol "p" (k : Color)
begin
do
  k == Red -> <<One>>
[] k == Red -> <<Two>>
[] otherwise -> <<Three>>
od
end
)");
    State s;
    s.values = {0};
    const auto succ = successors(m, s);
    CHECK(succ.size() == 4);
    for (const auto& t : succ) CHECK(t.target == s);
}

TEST_CASE("successors match the reference interpreter") {
    SUBCASE("escrow, every reachable state") {
        const Model m = example_model("escrow");
        const StateGraph g = build_graph(m);
        for (std::uint32_t n = 0; n < g.node_count(); ++n) {
            const State s = g.state(n);
            const auto succ = successors(m, s);
            REQUIRE(std::set<Transition>(succ.begin(), succ.end()) == ref_successors(m, s));
        }
    }
    SUBCASE("generated models, every assignment") {
        ModelGenerator gen(12);
        for (int i = 0; i < 60; ++i) {
            const Model m = Model::compile(gen.model());
            for_each_assignment(m, [&](const State& s) {
                const auto succ = successors(m, s);
                REQUIRE_MESSAGE(std::set<Transition>(succ.begin(), succ.end()) == ref_successors(m, s),
                                pretty_print(m.ir()));
            });
        }
    }
}

TEST_CASE("htlc at time 20 stays at time 20") {
    const Model m = example_model("htlc");
    const StateGraph g = build_graph(m);
    const int time = m.var_index("time");
    int checked = 0;
    for (std::uint32_t n = 0; n < g.node_count() && checked < 300; ++n) {
        const State s = g.state(n);
        if (s.values[time] != 20) continue;
        ++checked;
        for (const auto& t : successors(m, s)) CHECK(t.target.values[time] == 20);
    }
    CHECK(checked > 0);
}

TEST_CASE("toggle model graph") {
    const Model m = compile_text(kToggle);
    const StateGraph g = build_graph(m);
    CHECK(g.node_count() == 2);
    CHECK(g.edge_count() == 2);
}

TEST_CASE("reachable-state invariants of the bundled models") {
    for (const char* id : {"escrow", "htlc"}) {
        const Model m = example_model(id);
        const StateGraph g = build_graph(m);
        for (std::uint32_t n = 0; n < g.node_count(); ++n) {
            REQUIRE(m.in_domain(g.state(n)));
            REQUIRE_FALSE(g.successors(n).empty());
        }
    }
    const Model m = example_model("escrow");
    const StateGraph g = build_graph(m);
    const CExpr inv = m.compile_expr(
        expr("(depositedA => holdera == Contract) /\\ (depositedB => holderb == Contract)"));
    for (std::uint32_t n = 0; n < g.node_count(); ++n) REQUIRE(eval(m, inv, g.state(n)));
}

TEST_CASE("build_graph equals the reference closure") {
    SUBCASE("toggle and escrow") {
        check_against_reference(compile_text(kToggle));
        check_against_reference(example_model("escrow"));
    }
    SUBCASE("htlc with Time 0..10 and timeouts 4/3") {
        check_against_reference(Model::compile(shrink_time(example_ir("htlc"), 10, 4, 3)));
    }
    SUBCASE("generated models") {
        ModelGenerator gen(8);
        for (int i = 0; i < 60; ++i) {
            const Model m = Model::compile(gen.model());
            check_against_reference(m);
            const StateGraph g = build_graph(m);
            for (std::uint32_t n = 0; n < g.node_count(); ++n) REQUIRE(m.in_domain(g.state(n)));
        }
    }
}

TEST_CASE("build_graph is identical across 1, 2 and 8 threads") {
    for (const char* id : {"escrow", "htlc"}) {
        const Model m = example_model(id);
        GraphOptions one;
        one.threads = 1;
        const StateGraph base = build_graph(m, one);
        for (unsigned t : {2u, 8u}) {
            GraphOptions opts;
            opts.threads = t;
            require_same_graph(base, build_graph(m, opts));
        }
    }
}

TEST_CASE("node budget is enforced") {
    const Model m = example_model("escrow");
    GraphOptions opts;
    opts.node_budget = 100;
    CHECK_THROWS_AS(build_graph(m, opts), ResourceError);
}

TEST_CASE("DOT export") {
    const Model m = example_model("escrow");
    const StateGraph g = build_graph(m);
    const std::string dot = to_dot(m, g);
    CHECK(dot == to_dot(m, build_graph(m)));
    std::size_t nodes = 0;
    for (std::uint32_t n = 0; n < g.node_count(); ++n)
        if (dot.find("\n  n" + std::to_string(n) + " [") != std::string::npos) ++nodes;
    CHECK(nodes == g.node_count());
    CHECK(to_dot(compile_text(kToggle), build_graph(compile_text(kToggle))).find("n2 [") == std::string::npos);
}
