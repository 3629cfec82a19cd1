#pragma once

// Direct set-valued interpreter over the IR, used as an oracle for the
// compiled executor, the profile enumeration and build_graph.

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "swapmc/semantics.hpp"

namespace swapmc::testing {

inline Value clamp_to(const VarInfo& v, Value x) { return std::max(v.lo, std::min(v.hi, x)); }

inline std::set<State> ref_exec(const Model& m, const Statement& st, const State& s, const ActionProfile& p) {
    switch (st.kind) {
    case Statement::Kind::Skip: return {s};
    case Statement::Kind::Assign: {
        State t = s;
        const int v = m.var_index(st.target);
        t.values[v] = clamp_to(m.vars()[v], eval_expr(m, expand_defines(st.value, m.ir()), s, &p));
        return {t};
    }
    case Statement::Kind::Seq: {
        std::set<State> cur{s};
        for (const auto& part : st.body) {
            std::set<State> next;
            for (const auto& c : cur) {
                auto r = ref_exec(m, part, c, p);
                next.insert(r.begin(), r.end());
            }
            cur = std::move(next);
        }
        return cur;
    }
    case Statement::Kind::Choice: {
        std::set<State> out;
        bool any = false;
        const Statement* otherwise = nullptr;
        for (const auto& b : st.branches) {
            if (!b.guard) {
                otherwise = &b.body;
                continue;
            }
            if (eval_expr(m, expand_defines(*b.guard, m.ir()), s, &p)) {
                any = true;
                auto r = ref_exec(m, b.body, s, p);
                out.insert(r.begin(), r.end());
            }
        }
        if (any) return out;
        if (otherwise) return ref_exec(m, *otherwise, s, p);
        return {s};
    }
    case Statement::Kind::Nondet: {
        std::set<State> out;
        std::vector<int> idx;
        for (const auto& name : st.vars) idx.push_back(m.var_index(name));
        const Expr rel = expand_defines(st.value, m.ir());
        State cand = s;
        std::function<void(std::size_t)> rec = [&](std::size_t k) {
            if (k == idx.size()) {
                if (eval_expr(m, rel, s, &p, &cand)) out.insert(cand);
                return;
            }
            const auto& info = m.vars()[idx[k]];
            for (Value x = info.lo; x <= info.hi; ++x) {
                cand.values[idx[k]] = x;
                rec(k + 1);
            }
        };
        rec(0);
        return out;
    }
    }
    return {};
}

// Every profile in the product of the agents' enabled actions.
inline std::vector<ActionProfile> all_profiles(const Model& m, const State& s) {
    std::vector<ActionProfile> out{ActionProfile{}};
    for (std::size_t a = 0; a < m.agents().size(); ++a) {
        std::vector<ActionProfile> next;
        for (const auto& p : out)
            for (int act : enabled_actions(m, static_cast<int>(a), s)) {
                ActionProfile q = p;
                q.actions.push_back(static_cast<std::uint16_t>(act));
                next.push_back(std::move(q));
            }
        out = std::move(next);
    }
    return out;
}

inline std::set<Transition> ref_successors(const Model& m, const State& s) {
    std::set<Transition> out;
    const Statement body = m.ir().transitions.value_or(Statement::skip());
    for (const auto& p : all_profiles(m, s))
        for (const auto& t : ref_exec(m, body, s, p)) out.insert({p, t});
    return out;
}

// Reachable states and distinct (s, s') pairs from the reference interpreter.
struct RefGraph {
    std::set<State> nodes;
    std::set<std::pair<State, State>> edges;
};

inline RefGraph ref_closure(const Model& m) {
    RefGraph g;
    const auto init = initial_states(m);
    std::vector<State> fresh(init.begin(), init.end());
    g.nodes.insert(init.begin(), init.end());
    while (!fresh.empty()) {
        std::vector<State> next;
        for (const auto& s : fresh) {
            for (const auto& t : ref_successors(m, s)) {
                g.edges.insert({s, t.target});
                if (g.nodes.insert(t.target).second) next.push_back(t.target);
            }
        }
        fresh = std::move(next);
    }
    return g;
}

}  // namespace swapmc::testing
