#include "swapmc/checker.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "swapmc/scc.hpp"
#include "swapmc/validate.hpp"

namespace swapmc {

std::string outcome_name(Outcome o) {
    switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Refuted: return "Refuted";
    case Outcome::Vacuous: return "Vacuous";
    }
    return "?";
}

std::vector<std::uint64_t> atom_masks(const Model& m, const StateGraph& g, const std::vector<Expr>& atoms) {
    if (atoms.size() > 64) throw std::invalid_argument("specification has more than 64 distinct atoms");
    std::vector<std::uint64_t> masks(g.node_count(), 0);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        const std::uint64_t bit = std::uint64_t{1} << a;
        const int slot = g.atom_slot(atoms[a]);
        if (slot >= 0) {
            for (std::uint32_t s = 0; s < g.node_count(); ++s)
                if (g.atom(slot, s)) masks[s] |= bit;
            continue;
        }
        const CExpr c = m.compile_expr(atoms[a]);
        for (std::uint32_t s = 0; s < g.node_count(); ++s)
            if (eval(m, c, g.state(s))) masks[s] |= bit;
    }
    return masks;
}

Product build_product(const StateGraph& g, const Gba& a, const std::vector<std::uint64_t>& masks,
                      std::uint64_t budget) {
    const std::size_t q_count = a.nodes.size();
    std::vector<std::uint64_t> care(q_count, 0);
    std::vector<std::uint64_t> want(q_count, 0);
    for (std::size_t q = 0; q < q_count; ++q) {
        for (const auto& l : a.nodes[q].label) {
            care[q] |= std::uint64_t{1} << l.atom;
            if (l.positive) want[q] |= std::uint64_t{1} << l.atom;
        }
    }
    auto label_ok = [&](std::uint32_t s, std::uint32_t q) { return (masks[s] & care[q]) == want[q]; };

    Product p;
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    const std::uint64_t dense_size = static_cast<std::uint64_t>(g.node_count()) * q_count;
    const bool dense = dense_size <= (std::uint64_t{1} << 26);
    std::vector<std::uint32_t> dense_index(dense ? dense_size : 0, kNone);
    std::unordered_map<std::uint64_t, std::uint32_t> sparse_index;

    auto intern = [&](std::uint32_t s, std::uint32_t q) {
        const std::uint64_t key = static_cast<std::uint64_t>(s) * q_count + q;
        std::uint32_t* slot = nullptr;
        if (dense) {
            slot = &dense_index[key];
        } else {
            slot = &sparse_index.try_emplace(key, kNone).first->second;
        }
        if (*slot == kNone) {
            if (p.model_node.size() >= budget)
                throw ResourceError("product budget of " + std::to_string(budget) + " states exceeded");
            *slot = static_cast<std::uint32_t>(p.model_node.size());
            p.model_node.push_back(s);
            p.gba_node.push_back(q);
        }
        return *slot;
    };

    for (auto s : g.initial())
        for (auto q : a.initial)
            if (label_ok(s, q)) p.initial.push_back(intern(s, q));
    std::sort(p.initial.begin(), p.initial.end());
    p.initial.erase(std::unique(p.initial.begin(), p.initial.end()), p.initial.end());

    p.offsets.push_back(0);
    for (std::size_t id = 0; id < p.model_node.size(); ++id) {
        const std::uint32_t s = p.model_node[id];
        const std::uint32_t q = p.gba_node[id];
        const std::size_t first = p.targets.size();
        for (auto t : g.successors(s))
            for (auto r : a.nodes[q].successors)
                if (label_ok(t, r)) p.targets.push_back(intern(t, r));
        std::sort(p.targets.begin() + static_cast<std::ptrdiff_t>(first), p.targets.end());
        p.offsets.push_back(p.targets.size());
    }

    for (const auto& set : a.acceptance) {
        std::vector<char> in_set(q_count, 0);
        for (auto q : set) in_set[q] = 1;
        std::vector<char> member(p.node_count());
        for (std::size_t id = 0; id < p.node_count(); ++id) member[id] = in_set[p.gba_node[id]];
        p.accepting.push_back(std::move(member));
    }
    for (std::size_t f = 0; f < g.fairness_count(); ++f) {
        std::vector<char> member(p.node_count());
        for (std::size_t id = 0; id < p.node_count(); ++id) member[id] = g.fair(f, p.model_node[id]);
        p.accepting.push_back(std::move(member));
    }
    return p;
}

namespace {

// Shortest path from `from` to a node satisfying `goal`, moving only inside
// component `comp`.  With `strict`, the path has at least one edge.  Returns
// the nodes after `from`, ending at the goal.
template <class Goal>
std::vector<std::uint32_t> path_within(const Product& p, const SccResult& scc, std::uint32_t from, bool strict,
                                       Goal&& goal) {
    if (!strict && goal(from)) return {};
    const std::uint32_t comp = scc.component[from];
    std::unordered_map<std::uint32_t, std::uint32_t> parent;
    std::deque<std::uint32_t> queue;
    auto visit = [&](std::uint32_t v, std::uint32_t via) -> bool {
        if (scc.component[v] != comp || parent.contains(v)) return false;
        parent.emplace(v, via);
        queue.push_back(v);
        return goal(v);
    };
    auto unwind = [&](std::uint32_t end) {
        std::vector<std::uint32_t> path;
        for (std::uint32_t v = end;; v = parent.at(v)) {
            path.push_back(v);
            if (parent.at(v) == from) break;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };
    for (std::uint64_t e = p.offsets[from]; e < p.offsets[from + 1]; ++e) {
        const std::uint32_t v = p.targets[e];
        if (scc.component[v] != comp) continue;
        if (goal(v)) return {v};
        if (!parent.contains(v)) {
            parent.emplace(v, from);
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint64_t e = p.offsets[u]; e < p.offsets[u + 1]; ++e)
            if (visit(p.targets[e], u)) return unwind(p.targets[e]);
    }
    throw std::logic_error("no path inside a strongly connected component");
}

}  // namespace

std::optional<ProductLasso> find_fair_accepting_lasso(const Product& p) {
    const std::size_t n = p.node_count();
    if (n == 0) return std::nullopt;
    const SccResult scc = tarjan_scc(p.offsets, p.targets);
    const std::size_t sets = p.accepting.size();

    std::vector<char> cyclic(scc.count, 0);
    std::vector<std::vector<char>> hit(scc.count, std::vector<char>(sets, 0));
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto c = scc.component[v];
        if (!cyclic[c] && nontrivial(scc, v, p.offsets, p.targets)) cyclic[c] = 1;
        for (std::size_t k = 0; k < sets; ++k)
            if (p.accepting[k][v]) hit[c][k] = 1;
    }
    std::vector<char> good(scc.count, 0);
    bool any = false;
    for (std::uint32_t c = 0; c < scc.count; ++c) {
        good[c] = cyclic[c] && std::all_of(hit[c].begin(), hit[c].end(), [](char h) { return h != 0; });
        any = any || good[c];
    }
    if (!any) return std::nullopt;

    // Shortest prefix from an initial node into an accepting component.
    constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> parent(n, kNone);
    std::deque<std::uint32_t> queue;
    std::uint32_t entry = kNone;
    for (auto i : p.initial) {
        if (parent[i] != kNone) continue;
        parent[i] = i;
        queue.push_back(i);
    }
    while (!queue.empty() && entry == kNone) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        if (good[scc.component[u]]) {
            entry = u;
            break;
        }
        for (std::uint64_t e = p.offsets[u]; e < p.offsets[u + 1]; ++e) {
            const std::uint32_t v = p.targets[e];
            if (parent[v] == kNone) {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    if (entry == kNone) return std::nullopt;

    ProductLasso lasso;
    for (std::uint32_t v = entry; parent[v] != v;) {
        v = parent[v];
        lasso.prefix.push_back(v);
    }
    std::reverse(lasso.prefix.begin(), lasso.prefix.end());

    lasso.cycle.push_back(entry);
    std::uint32_t cur = entry;
    for (std::size_t k = 0; k < sets; ++k) {
        auto step = path_within(p, scc, cur, false, [&](std::uint32_t v) { return p.accepting[k][v] != 0; });
        for (auto v : step) lasso.cycle.push_back(v);
        if (!step.empty()) cur = step.back();
    }
    auto back = path_within(p, scc, cur, true, [&](std::uint32_t v) { return v == entry; });
    back.pop_back();
    for (auto v : back) lasso.cycle.push_back(v);
    return lasso;
}

namespace {

ActionProfile profile_between(const Model& m, const State& from, const State& to) {
    for (const auto& pt : partial_successors(m, from)) {
        if (!std::binary_search(pt.targets.begin(), pt.targets.end(), to)) continue;
        ActionProfile p = pt.profile;
        for (std::size_t a = 0; a < p.actions.size(); ++a) {
            if (p.actions[a] != kAnyAction) continue;
            p.actions[a] = static_cast<std::uint16_t>(enabled_actions(m, static_cast<int>(a), from).front());
        }
        return p;
    }
    throw std::logic_error("trace step is not a transition of the model");
}

}  // namespace

LassoTrace make_trace(const Model& m, const StateGraph& g, const std::vector<std::uint32_t>& prefix,
                      const std::vector<std::uint32_t>& cycle) {
    std::vector<std::uint32_t> path = prefix;
    path.insert(path.end(), cycle.begin(), cycle.end());
    LassoTrace t;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const std::uint32_t next = i + 1 < path.size() ? path[i + 1] : cycle.front();
        TraceStep step{g.state(path[i]), profile_between(m, g.state(path[i]), g.state(next))};
        (i < prefix.size() ? t.prefix : t.cycle).push_back(std::move(step));
    }
    return t;
}

std::string normalize_whitespace(const std::string& s) {
    std::istringstream in(s);
    std::string word;
    std::string out;
    while (in >> word) out += (out.empty() ? "" : " ") + word;
    return out;
}

std::size_t find_spec(const Model& m, const std::string& selector) {
    const auto& specs = m.specs();
    if (!selector.empty() && selector[0] == '#') {
        std::size_t n = 0;
        try {
            std::size_t used = 0;
            n = std::stoul(selector.substr(1), &used);
            if (used + 1 != selector.size()) n = 0;
        } catch (const std::exception&) {
            n = 0;
        }
        if (n < 1 || n > specs.size())
            throw std::invalid_argument("spec index " + selector + " out of range (model has " +
                                        std::to_string(specs.size()) + " specs)");
        return n - 1;
    }
    const std::string want = normalize_whitespace(selector);
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (normalize_whitespace(specs[i].label) == want) return i;
    throw std::invalid_argument("no spec labelled \"" + want + "\"");
}

namespace {

// Initial nodes that cannot reach a fair cycle.
std::size_t initial_without_fair_run(const StateGraph& g) {
    const SccResult scc = tarjan_scc(g.offsets(), g.targets());
    const std::size_t sets = g.fairness_count();
    std::vector<std::vector<std::uint32_t>> members(scc.count);
    for (std::uint32_t v = 0; v < g.node_count(); ++v) members[scc.component[v]].push_back(v);
    // Tarjan emits components in reverse topological order, so successors of
    // a component are decided before it.
    std::vector<char> good(scc.count, 0);
    for (std::uint32_t c = 0; c < scc.count; ++c) {
        bool cyclic = false;
        bool reaches = false;
        std::vector<char> hit(sets, 0);
        for (auto v : members[c]) {
            for (auto w : g.successors(v)) {
                if (scc.component[w] == c)
                    cyclic = true;
                else if (good[scc.component[w]])
                    reaches = true;
            }
            for (std::size_t k = 0; k < sets; ++k)
                if (g.fair(k, v)) hit[k] = 1;
        }
        const bool fair = cyclic && std::all_of(hit.begin(), hit.end(), [](char h) { return h != 0; });
        good[c] = fair || reaches;
    }
    std::size_t bad = 0;
    for (auto i : g.initial())
        if (!good[scc.component[i]]) ++bad;
    return bad;
}

}  // namespace

Verdict check_formula(const Model& m, const StateGraph& g, const Formula& body, const std::string& label,
                      const CheckOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const Formula expanded = expand_defines(body, m.ir());
    std::vector<Expr> table;
    const Formula negated = bind_atoms(Formula::unary(LtlOp::Not, expanded), table);
    const Gba a = ltl_to_gba(negated);
    const auto masks = atom_masks(m, g, a.atoms);
    const Product p = build_product(g, a, masks, opts.product_budget);

    Verdict v;
    v.label = label;
    v.stats.states = g.node_count();
    v.stats.product_states = p.node_count();
    {
        std::vector<char> seen(g.node_count(), 0);
        for (auto s : p.model_node) seen[s] = 1;
        v.stats.product_model_states = static_cast<std::uint64_t>(std::count(seen.begin(), seen.end(), 1));
    }
    v.stats.product_edges = p.targets.size();
    v.stats.automaton_states = a.nodes.size();
    v.stats.acceptance_sets = p.accepting.size();
    if (auto lasso = find_fair_accepting_lasso(p)) {
        std::vector<std::uint32_t> prefix;
        std::vector<std::uint32_t> cycle;
        for (auto id : lasso->prefix) prefix.push_back(p.model_node[id]);
        for (auto id : lasso->cycle) cycle.push_back(p.model_node[id]);
        v.outcome = Outcome::Refuted;
        v.trace = make_trace(m, g, prefix, cycle);
        const TraceReport report = validate_counterexample(m, expanded, *v.trace);
        if (!report.ok()) throw std::logic_error("counterexample failed validation: " + report.failures.front());
    } else {
        v.initial_without_fair_run = initial_without_fair_run(g);
        v.outcome = v.initial_without_fair_run == g.initial().size() ? Outcome::Vacuous : Outcome::Holds;
    }
    v.stats.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

Verdict check(const Model& m, const StateGraph& g, std::size_t spec_index, const CheckOptions& opts) {
    const auto& spec = m.specs().at(spec_index);
    return check_formula(m, g, spec.body, spec.label, opts);
}

Verdict check(const Model& m, const StateGraph& g, const std::string& selector, const CheckOptions& opts) {
    return check(m, g, find_spec(m, selector), opts);
}

// ---------------------------------------------------------------------------
// Validation

TraceReport validate_counterexample(const Model& m, const Formula& body, const LassoTrace& t) {
    TraceReport r;
    if (t.cycle.empty()) {
        r.failures.push_back("cycle is empty");
        return r;
    }
    std::vector<const TraceStep*> steps;
    for (const auto& s : t.prefix) steps.push_back(&s);
    for (const auto& s : t.cycle) steps.push_back(&s);

    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!m.in_domain(steps[i]->state)) {
            r.failures.push_back("step " + std::to_string(i) + " leaves the variable domains");
            return r;
        }
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const State& next = i + 1 < steps.size() ? steps[i + 1]->state : t.cycle.front().state;
        const auto succ = successors(m, steps[i]->state);
        const Transition want{steps[i]->actions, next};
        if (!std::binary_search(succ.begin(), succ.end(), want))
            r.failures.push_back("step " + std::to_string(i) + " is not a transition under " +
                                 m.format_profile(steps[i]->actions));
    }
    const State& first = steps.front()->state;
    for (const auto& c : m.init_conjuncts()) {
        if (!eval(m, c, first)) {
            r.failures.push_back("trace does not start in an initial state");
            break;
        }
    }
    for (std::size_t f = 0; f < m.fairness().size(); ++f) {
        const bool seen = std::any_of(t.cycle.begin(), t.cycle.end(),
                                      [&](const TraceStep& s) { return eval(m, m.fairness()[f], s.state) != 0; });
        if (!seen)
            r.failures.push_back("fairness constraint " + std::to_string(f + 1) + " never holds on the cycle");
    }

    std::vector<Expr> table;
    const Formula negated = bind_atoms(Formula::unary(LtlOp::Not, expand_defines(body, m.ir())), table);
    std::vector<CExpr> atoms;
    for (const auto& e : table) atoms.push_back(m.compile_expr(e));
    auto word = [&](const std::vector<TraceStep>& part) {
        std::vector<Valuation> w;
        for (const auto& s : part) {
            Valuation v(atoms.size());
            for (std::size_t a = 0; a < atoms.size(); ++a) v[a] = eval(m, atoms[a], s.state) != 0;
            w.push_back(std::move(v));
        }
        return w;
    };
    if (!eval_on_lasso(negated, word(t.prefix), word(t.cycle)))
        r.failures.push_back("the specification holds on the lasso");
    return r;
}

// ---------------------------------------------------------------------------
// Naive bounded oracle

Verdict naive_check(const Model& m, const StateGraph& g, const Formula& body, int prefix_bound, int period_bound,
                    std::size_t node_limit) {
    const auto start = std::chrono::steady_clock::now();
    if (g.node_count() > node_limit)
        throw std::invalid_argument("naive_check supports at most " + std::to_string(node_limit) +
                                    " reachable states, graph has " + std::to_string(g.node_count()));
    if (prefix_bound < 0 || period_bound < 1) throw std::invalid_argument("naive_check bounds out of range");

    const std::size_t n = g.node_count();
    std::vector<Expr> table;
    const Formula negated = bind_atoms(Formula::unary(LtlOp::Not, expand_defines(body, m.ir())), table);
    if (table.size() > 8) throw std::invalid_argument("naive_check supports at most 8 atoms");
    const LassoEvaluator ev(negated);

    // One byte per position: bit a is the truth of atom a.
    std::vector<char> letter(n, 0);
    for (std::size_t a = 0; a < table.size(); ++a) {
        const CExpr c = m.compile_expr(table[a]);
        for (std::uint32_t s = 0; s < n; ++s)
            if (eval(m, c, g.state(s))) letter[s] = static_cast<char>(letter[s] | (1 << a));
    }
    auto decode = [&](const std::string& w) {
        std::vector<Valuation> out;
        for (char ch : w) {
            Valuation v(table.size());
            for (std::size_t a = 0; a < table.size(); ++a) v[a] = (ch >> a) & 1;
            out.push_back(std::move(v));
        }
        return out;
    };
    std::vector<Valuation> valuation_of(n);
    for (std::uint32_t s = 0; s < n; ++s) valuation_of[s] = decode(std::string(1, letter[s])).front();

    const std::size_t sets = g.fairness_count();
    const std::uint64_t full = sets >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sets) - 1;
    std::vector<std::uint64_t> fair_mask(n, 0);
    for (std::uint32_t s = 0; s < n; ++s)
        for (std::size_t k = 0; k < sets; ++k)
            if (g.fair(k, s)) fair_mask[s] |= std::uint64_t{1} << k;
    std::vector<std::vector<std::uint32_t>> preds(n);
    for (std::uint32_t s = 0; s < n; ++s)
        for (auto t : g.successors(s)) preds[t].push_back(s);
    // A cycle through c0 stays inside c0's component; distances back to c0
    // prune paths that cannot close within the period bound.
    const SccResult scc = tarjan_scc(g.offsets(), g.targets());
    constexpr int kFar = std::numeric_limits<int>::max() / 2;
    std::vector<int> dist(n, kFar);
    std::unordered_map<std::string, LassoEvaluator::Vector> cycle_vectors;

    Verdict v;
    v.label = "naive";
    v.bounded = true;
    v.stats.states = n;

    // Paths are deduplicated by (atom word, fairness mask, end node): paths
    // agreeing on all three are interchangeable for the verdict.
    struct Entry {
        std::string word;
        std::uint64_t mask;
        std::uint32_t node;
        std::int64_t parent;
    };
    auto key_of = [](const std::string& word, std::uint64_t mask, std::uint32_t node) {
        std::string key = word;
        key.append(reinterpret_cast<const char*>(&mask), sizeof mask);
        key.append(reinterpret_cast<const char*>(&node), sizeof node);
        return key;
    };

    for (std::uint32_t c0 = 0; c0 < n && !v.trace; ++c0) {
        if (!nontrivial(scc, c0, g.offsets(), g.targets())) continue;
        const std::uint32_t comp = scc.component[c0];
        std::vector<std::uint32_t> touched{c0};
        dist[c0] = 0;
        for (std::size_t k = 0; k < touched.size(); ++k) {
            const std::uint32_t u = touched[k];
            if (dist[u] >= period_bound) continue;
            for (auto w : preds[u]) {
                if (scc.component[w] != comp || dist[w] != kFar) continue;
                dist[w] = dist[u] + 1;
                touched.push_back(w);
            }
        }

        // Distinct truth vectors at the cycle start, each with one witness cycle.
        std::map<LassoEvaluator::Vector, std::vector<std::uint32_t>> starts;
        std::vector<std::vector<Entry>> layers(1);
        layers[0].push_back({std::string(1, letter[c0]), fair_mask[c0], c0, -1});
        for (int len = 1; len <= period_bound; ++len) {
            const auto& layer = layers.back();
            for (std::size_t i = 0; i < layer.size(); ++i) {
                const Entry& e = layer[i];
                if (e.mask != full) continue;
                const auto succ = g.successors(e.node);
                if (!std::binary_search(succ.begin(), succ.end(), c0)) continue;
                auto it = cycle_vectors.find(e.word);
                if (it == cycle_vectors.end()) it = cycle_vectors.emplace(e.word, ev.cycle(decode(e.word)).front()).first;
                if (starts.contains(it->second)) continue;
                std::vector<std::uint32_t> nodes;
                for (std::int64_t k = static_cast<std::int64_t>(i), l = len - 1; k >= 0; k = layers[l].at(k).parent, --l)
                    nodes.push_back(layers[l][k].node);
                std::reverse(nodes.begin(), nodes.end());
                starts.emplace(it->second, std::move(nodes));
            }
            if (len == period_bound) break;
            std::vector<Entry> next;
            std::unordered_set<std::string> seen;
            for (std::size_t i = 0; i < layer.size(); ++i) {
                for (auto t : g.successors(layer[i].node)) {
                    // The path has len nodes; closing from t takes dist[t] more edges.
                    if (dist[t] == kFar || len + dist[t] > period_bound) continue;
                    std::string w = layer[i].word + letter[t];
                    const std::uint64_t mask = layer[i].mask | fair_mask[t];
                    if (!seen.insert(key_of(w, mask, t)).second) continue;
                    next.push_back({std::move(w), mask, t, static_cast<std::int64_t>(i)});
                }
            }
            layers.push_back(std::move(next));
        }
        for (auto u : touched) dist[u] = kFar;

        for (const auto& [vec, cycle_nodes] : starts) {
            if (g.is_initial(c0) && ev.root(vec)) {
                v.outcome = Outcome::Refuted;
                v.trace = make_trace(m, g, {}, cycle_nodes);
                break;
            }
            // Backward search over prefixes ending just before c0.
            struct Back {
                std::uint32_t node;
                LassoEvaluator::Vector vec;
                std::int64_t parent;
            };
            std::vector<Back> found;
            std::set<std::pair<std::uint32_t, LassoEvaluator::Vector>> seen;
            std::vector<std::int64_t> frontier;
            auto push = [&](std::uint32_t u, const LassoEvaluator::Vector& after, std::int64_t parent,
                            std::vector<std::int64_t>& into) {
                auto x = ev.step(valuation_of[u], after);
                if (!seen.emplace(u, x).second) return;
                found.push_back({u, std::move(x), parent});
                into.push_back(static_cast<std::int64_t>(found.size()) - 1);
            };
            for (auto u : preds[c0]) push(u, vec, -1, frontier);
            for (int depth = 1; depth <= prefix_bound && !frontier.empty() && !v.trace; ++depth) {
                std::vector<std::int64_t> next;
                for (auto idx : frontier) {
                    if (g.is_initial(found[idx].node) && ev.root(found[idx].vec)) {
                        std::vector<std::uint32_t> prefix;
                        for (std::int64_t k = idx; k >= 0; k = found[k].parent) prefix.push_back(found[k].node);
                        v.outcome = Outcome::Refuted;
                        v.trace = make_trace(m, g, prefix, cycle_nodes);
                        break;
                    }
                    if (depth == prefix_bound) continue;
                    for (auto u : preds[found[idx].node]) push(u, found[idx].vec, idx, next);
                }
                frontier = std::move(next);
            }
            if (v.trace) break;
        }
    }
    v.stats.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return v;
}

Verdict naive_check(const Model& m, const StateGraph& g, const std::string& selector, int prefix_bound,
                    int period_bound, std::size_t node_limit) {
    const auto& spec = m.specs().at(find_spec(m, selector));
    Verdict v = naive_check(m, g, spec.body, prefix_bound, period_bound, node_limit);
    v.label = spec.label;
    return v;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json state_to_json(const Model& m, const State& s) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < m.vars().size(); ++i) {
        const auto& info = m.vars()[i];
        switch (info.type.kind) {
        case ValueType::Kind::Bool: j[info.name] = s.values[i] != 0; break;
        case ValueType::Kind::Int: j[info.name] = s.values[i]; break;
        case ValueType::Kind::Enum: j[info.name] = m.format_value(static_cast<int>(i), s.values[i]); break;
        }
    }
    return j;
}

nlohmann::json profile_to_json(const Model& m, const ActionProfile& p) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t a = 0; a < m.agents().size(); ++a)
        j[m.agents()[a].name] = p.actions[a] == kAnyAction ? "*" : m.agents()[a].actions[p.actions[a]];
    return j;
}

nlohmann::json verdict_to_json(const Model& m, const std::string& model_name, const Verdict& v) {
    nlohmann::json j;
    j["model"] = model_name;
    j["spec_label"] = v.label;
    j["outcome"] = outcome_name(v.outcome);
    j["stats"] = {{"states", v.stats.states},
                  {"product_states", v.stats.product_states},
                  {"product_model_states", v.stats.product_model_states},
                  {"millis", v.stats.millis}};
    if (v.initial_without_fair_run > 0) j["initial_without_fair_run"] = v.initial_without_fair_run;
    if (v.trace) {
        auto steps = [&](const std::vector<TraceStep>& part) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& s : part)
                arr.push_back({{"state", state_to_json(m, s.state)}, {"actions", profile_to_json(m, s.actions)}});
            return arr;
        };
        j["trace"] = {{"prefix", steps(v.trace->prefix)}, {"cycle", steps(v.trace->cycle)}};
    }
    return j;
}

}  // namespace swapmc
