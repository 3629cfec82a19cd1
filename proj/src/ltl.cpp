#include "swapmc/ltl.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "swapmc/parser.hpp"
#include "swapmc/scc.hpp"

namespace swapmc {

Formula bind_atoms(const Formula& f, std::vector<Expr>& table) {
    switch (f.op()) {
    case LtlOp::True:
    case LtlOp::False: return f;
    case LtlOp::Atom: {
        auto it = std::find(table.begin(), table.end(), f.atom_expr());
        if (it == table.end()) {
            table.push_back(f.atom_expr());
            it = table.end() - 1;
        }
        return Formula::atom(f.atom_expr(), static_cast<int>(it - table.begin()));
    }
    default:
        if (f.is_unary()) return Formula::unary(f.op(), bind_atoms(f.lhs(), table));
        return Formula::binary(f.op(), bind_atoms(f.lhs(), table), bind_atoms(f.rhs(), table));
    }
}

namespace {

bool is_const(const Formula& f, bool value) { return f.op() == (value ? LtlOp::True : LtlOp::False); }

Formula mk_and(Formula a, Formula b) {
    if (is_const(a, false) || is_const(b, false)) return Formula::truth(false);
    if (is_const(a, true)) return b;
    if (is_const(b, true)) return a;
    return Formula::binary(LtlOp::And, std::move(a), std::move(b));
}

Formula mk_or(Formula a, Formula b) {
    if (is_const(a, true) || is_const(b, true)) return Formula::truth(true);
    if (is_const(a, false)) return b;
    if (is_const(b, false)) return a;
    return Formula::binary(LtlOp::Or, std::move(a), std::move(b));
}

Formula mk_unary(LtlOp op, Formula a) {
    if (a.op() == LtlOp::True || a.op() == LtlOp::False) return a;
    return Formula::unary(op, std::move(a));
}

Formula mk_until(Formula a, Formula b) {
    if (b.op() == LtlOp::True || b.op() == LtlOp::False) return b;
    if (is_const(a, true)) return Formula::unary(LtlOp::Finally, std::move(b));
    if (is_const(a, false)) return b;
    return Formula::binary(LtlOp::Until, std::move(a), std::move(b));
}

Formula mk_release(Formula a, Formula b) {
    if (b.op() == LtlOp::True || b.op() == LtlOp::False) return b;
    if (is_const(a, false)) return Formula::unary(LtlOp::Globally, std::move(b));
    if (is_const(a, true)) return b;
    return Formula::binary(LtlOp::Release, std::move(a), std::move(b));
}

Formula nnf(const Formula& f, bool neg) {
    switch (f.op()) {
    case LtlOp::True: return Formula::truth(!neg);
    case LtlOp::False: return Formula::truth(neg);
    case LtlOp::Atom: return neg ? Formula::unary(LtlOp::Not, f) : f;
    case LtlOp::Not: return nnf(f.lhs(), !neg);
    case LtlOp::And:
        return neg ? mk_or(nnf(f.lhs(), true), nnf(f.rhs(), true)) : mk_and(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case LtlOp::Or:
        return neg ? mk_and(nnf(f.lhs(), true), nnf(f.rhs(), true)) : mk_or(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case LtlOp::Implies:
        return neg ? mk_and(nnf(f.lhs(), false), nnf(f.rhs(), true)) : mk_or(nnf(f.lhs(), true), nnf(f.rhs(), false));
    case LtlOp::Next: return mk_unary(LtlOp::Next, nnf(f.lhs(), neg));
    case LtlOp::Globally: return mk_unary(neg ? LtlOp::Finally : LtlOp::Globally, nnf(f.lhs(), neg));
    case LtlOp::Finally: return mk_unary(neg ? LtlOp::Globally : LtlOp::Finally, nnf(f.lhs(), neg));
    case LtlOp::Until:
        return neg ? mk_release(nnf(f.lhs(), true), nnf(f.rhs(), true))
                   : mk_until(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case LtlOp::Release:
        return neg ? mk_until(nnf(f.lhs(), true), nnf(f.rhs(), true))
                   : mk_release(nnf(f.lhs(), false), nnf(f.rhs(), false));
    }
    return f;
}

}  // namespace

Formula normalize(const Formula& f) { return nnf(f, false); }

bool is_nnf(const Formula& f) {
    switch (f.op()) {
    case LtlOp::True:
    case LtlOp::False:
    case LtlOp::Atom: return true;
    case LtlOp::Not: return f.lhs().op() == LtlOp::Atom;
    case LtlOp::Implies: return false;
    default: return is_nnf(f.lhs()) && (!f.is_binary() || is_nnf(f.rhs()));
    }
}

int temporal_depth_count(const Formula& f) {
    if (f.op() == LtlOp::True || f.op() == LtlOp::False || f.op() == LtlOp::Atom) return 0;
    int n = f.is_temporal() ? 1 : 0;
    n += temporal_depth_count(f.lhs());
    if (f.is_binary()) n += temporal_depth_count(f.rhs());
    return n;
}

// ---------------------------------------------------------------------------
// Tableau

bool Gba::label_holds(std::uint32_t node, const Valuation& v) const {
    for (const auto& l : nodes[node].label)
        if (v[l.atom] != l.positive) return false;
    return true;
}

namespace {

// Interned subformula of the normalized input, with F a = True U a and
// G a = False R a.
struct TForm {
    LtlOp op;
    int atom = -1;  // Atom, or negated atom when op == Not
    int lhs = -1;
    int rhs = -1;
    friend auto operator<=>(const TForm&, const TForm&) = default;
};

class Tableau {
public:
    explicit Tableau(const Formula& f) { root_ = intern(f); }

    Gba build(std::vector<Expr> atoms) {
        Node start;
        start.incoming.insert(-1);
        start.fresh.insert(root_);
        expand(std::move(start));

        Gba g;
        g.atoms = std::move(atoms);
        g.nodes.resize(done_.size());
        for (std::size_t q = 0; q < done_.size(); ++q) {
            const auto& d = done_[q];
            for (int i : d.incoming) {
                if (i < 0)
                    g.initial.push_back(static_cast<std::uint32_t>(q));
                else
                    g.nodes[i].successors.push_back(static_cast<std::uint32_t>(q));
            }
            for (int id : d.old) {
                const auto& t = forms_[id];
                if (t.op == LtlOp::Atom) g.nodes[q].label.push_back({t.atom, true});
                if (t.op == LtlOp::Not) g.nodes[q].label.push_back({t.atom, false});
                g.nodes[q].obligations.push_back(to_string(display_[id]));
            }
            std::sort(g.nodes[q].label.begin(), g.nodes[q].label.end());
        }
        for (auto& n : g.nodes) std::sort(n.successors.begin(), n.successors.end());
        std::sort(g.initial.begin(), g.initial.end());
        for (std::size_t id = 0; id < forms_.size(); ++id) {
            if (forms_[id].op != LtlOp::Until) continue;
            std::vector<std::uint32_t> set;
            for (std::size_t q = 0; q < done_.size(); ++q) {
                const auto& old = done_[q].old;
                if (!old.contains(static_cast<int>(id)) || old.contains(forms_[id].rhs))
                    set.push_back(static_cast<std::uint32_t>(q));
            }
            g.acceptance.push_back(std::move(set));
            g.acceptance_formulas.push_back(to_string(display_[id]));
        }
        return g;
    }

private:
    struct Node {
        std::set<int> incoming;
        std::set<int> fresh;
        std::set<int> old;
        std::set<int> next;
    };

    int intern(const Formula& f) {
        TForm t{f.op()};
        switch (f.op()) {
        case LtlOp::True:
        case LtlOp::False: break;
        case LtlOp::Atom:
            if (f.atom_id() < 0) throw std::invalid_argument("formula atoms must be bound before translation");
            t.atom = f.atom_id();
            break;
        case LtlOp::Not:
            if (f.lhs().op() != LtlOp::Atom) throw std::invalid_argument("formula is not in negation normal form");
            t.atom = f.lhs().atom_id();
            break;
        case LtlOp::Finally:
            t.op = LtlOp::Until;
            t.lhs = intern(Formula::truth(true));
            t.rhs = intern(f.lhs());
            break;
        case LtlOp::Globally:
            t.op = LtlOp::Release;
            t.lhs = intern(Formula::truth(false));
            t.rhs = intern(f.lhs());
            break;
        case LtlOp::Implies: throw std::invalid_argument("formula is not in negation normal form");
        default:
            t.lhs = intern(f.lhs());
            if (f.is_binary()) t.rhs = intern(f.rhs());
        }
        if (auto it = index_.find(t); it != index_.end()) return it->second;
        const int id = static_cast<int>(forms_.size());
        forms_.push_back(t);
        display_.push_back(f);
        index_.emplace(t, id);
        return id;
    }

    bool contradicts(const Node& n, int id) const {
        const auto& t = forms_[id];
        if (t.op == LtlOp::False) return true;
        if (t.op != LtlOp::Atom && t.op != LtlOp::Not) return false;
        const TForm dual{t.op == LtlOp::Atom ? LtlOp::Not : LtlOp::Atom, t.atom};
        auto it = index_.find(dual);
        return it != index_.end() && n.old.contains(it->second);
    }

    void add_fresh(Node& n, int id) const {
        if (!n.old.contains(id)) n.fresh.insert(id);
    }

    void expand(Node n) {
        if (n.fresh.empty()) {
            for (auto& d : done_) {
                if (d.old == n.old && d.next == n.next) {
                    d.incoming.insert(n.incoming.begin(), n.incoming.end());
                    return;
                }
            }
            const int id = static_cast<int>(done_.size());
            Node succ;
            succ.incoming.insert(id);
            succ.fresh = n.next;
            done_.push_back(std::move(n));
            expand(std::move(succ));
            return;
        }
        const int eta = *n.fresh.begin();
        n.fresh.erase(n.fresh.begin());
        if (n.old.contains(eta)) {
            expand(std::move(n));
            return;
        }
        const TForm t = forms_[eta];
        switch (t.op) {
        case LtlOp::True:
        case LtlOp::False:
        case LtlOp::Atom:
        case LtlOp::Not:
            if (contradicts(n, eta)) return;
            n.old.insert(eta);
            expand(std::move(n));
            return;
        case LtlOp::And:
            n.old.insert(eta);
            add_fresh(n, t.lhs);
            add_fresh(n, t.rhs);
            expand(std::move(n));
            return;
        case LtlOp::Next:
            n.old.insert(eta);
            n.next.insert(t.lhs);
            expand(std::move(n));
            return;
        case LtlOp::Or: {
            n.old.insert(eta);
            Node other = n;
            add_fresh(n, t.lhs);
            add_fresh(other, t.rhs);
            expand(std::move(n));
            expand(std::move(other));
            return;
        }
        case LtlOp::Until: {
            n.old.insert(eta);
            Node other = n;
            add_fresh(n, t.lhs);
            n.next.insert(eta);
            add_fresh(other, t.rhs);
            expand(std::move(n));
            expand(std::move(other));
            return;
        }
        case LtlOp::Release: {
            n.old.insert(eta);
            Node other = n;
            add_fresh(n, t.rhs);
            n.next.insert(eta);
            add_fresh(other, t.lhs);
            add_fresh(other, t.rhs);
            expand(std::move(n));
            expand(std::move(other));
            return;
        }
        default: throw std::logic_error("unexpected operator in tableau");
        }
    }

    std::vector<TForm> forms_;
    std::vector<Formula> display_;
    std::map<TForm, int> index_;
    std::vector<Node> done_;
    int root_ = -1;
};

}  // namespace

Gba ltl_to_gba(const Formula& f) {
    std::vector<Expr> atoms;
    std::function<void(const Formula&)> collect = [&](const Formula& g) {
        if (g.op() == LtlOp::Atom) {
            const auto id = static_cast<std::size_t>(g.atom_id());
            if (g.atom_id() < 0) throw std::invalid_argument("formula atoms must be bound before translation");
            if (atoms.size() <= id) atoms.resize(id + 1);
            atoms[id] = g.atom_expr();
            return;
        }
        if (g.op() == LtlOp::True || g.op() == LtlOp::False) return;
        collect(g.lhs());
        if (g.is_binary()) collect(g.rhs());
    };
    collect(f);
    return Tableau(normalize(f)).build(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Lasso evaluation

LassoEvaluator::LassoEvaluator(const Formula& f) { add(f); }

int LassoEvaluator::add(const Formula& f) {
    Sub s{f.op()};
    if (f.op() == LtlOp::Atom) {
        if (f.atom_id() < 0) throw std::invalid_argument("formula atoms must be bound before evaluation");
        s.atom = f.atom_id();
    } else if (f.op() != LtlOp::True && f.op() != LtlOp::False) {
        s.lhs = add(f.lhs());
        if (f.is_binary()) s.rhs = add(f.rhs());
    }
    subs_.push_back(s);
    return static_cast<int>(subs_.size()) - 1;
}

// Value of a non-temporal subformula from values already known here.
bool LassoEvaluator::local(const Sub& s, const Valuation& letter, const Vector& here) const {
    switch (s.op) {
    case LtlOp::True: return true;
    case LtlOp::False: return false;
    case LtlOp::Atom: return letter.at(s.atom);
    case LtlOp::Not: return !here[s.lhs];
    case LtlOp::And: return here[s.lhs] && here[s.rhs];
    case LtlOp::Or: return here[s.lhs] || here[s.rhs];
    case LtlOp::Implies: return !here[s.lhs] || here[s.rhs];
    default: throw std::logic_error("temporal operator evaluated locally");
    }
}

LassoEvaluator::Vector LassoEvaluator::step(const Valuation& letter, const Vector& next) const {
    Vector here(subs_.size(), false);
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const Sub& s = subs_[i];
        switch (s.op) {
        case LtlOp::Next: here[i] = next[s.lhs]; break;
        case LtlOp::Finally: here[i] = here[s.lhs] || next[i]; break;
        case LtlOp::Globally: here[i] = here[s.lhs] && next[i]; break;
        case LtlOp::Until: here[i] = here[s.rhs] || (here[s.lhs] && next[i]); break;
        case LtlOp::Release: here[i] = here[s.rhs] && (here[s.lhs] || next[i]); break;
        default: here[i] = local(s, letter, here);
        }
    }
    return here;
}

std::vector<LassoEvaluator::Vector> LassoEvaluator::cycle(const std::vector<Valuation>& word) const {
    if (word.empty()) throw std::invalid_argument("lasso cycle must be nonempty");
    const std::size_t k = word.size();
    std::vector<Vector> v(k, Vector(subs_.size(), false));
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const Sub& s = subs_[i];
        switch (s.op) {
        case LtlOp::Next:
            for (std::size_t p = 0; p < k; ++p) v[p][i] = v[(p + 1) % k][s.lhs];
            break;
        case LtlOp::Finally:
        case LtlOp::Globally:
        case LtlOp::Until:
        case LtlOp::Release: {
            // Least fixpoint for F/U from all-false, greatest for G/R from
            // all-true; k+1 backward sweeps reach it.
            const bool greatest = s.op == LtlOp::Globally || s.op == LtlOp::Release;
            for (std::size_t p = 0; p < k; ++p) v[p][i] = greatest;
            for (std::size_t sweep = 0; sweep <= k; ++sweep) {
                bool changed = false;
                for (std::size_t q = k; q-- > 0;) {
                    const bool next = v[(q + 1) % k][i];
                    bool val = false;
                    switch (s.op) {
                    case LtlOp::Finally: val = v[q][s.lhs] || next; break;
                    case LtlOp::Globally: val = v[q][s.lhs] && next; break;
                    case LtlOp::Until: val = v[q][s.rhs] || (v[q][s.lhs] && next); break;
                    default: val = v[q][s.rhs] && (v[q][s.lhs] || next); break;
                    }
                    if (val != v[q][i]) {
                        v[q][i] = val;
                        changed = true;
                    }
                }
                if (!changed) break;
            }
            break;
        }
        default:
            for (std::size_t p = 0; p < k; ++p) v[p][i] = local(s, word[p], v[p]);
        }
    }
    return v;
}

bool eval_on_lasso(const Formula& f, const std::vector<Valuation>& prefix, const std::vector<Valuation>& cycle) {
    const LassoEvaluator ev(f);
    auto v = ev.cycle(cycle).front();
    for (std::size_t i = prefix.size(); i-- > 0;) v = ev.step(prefix[i], v);
    return ev.root(v);
}

bool gba_accepts_lasso(const Gba& a, const std::vector<Valuation>& prefix, const std::vector<Valuation>& cycle) {
    if (cycle.empty()) throw std::invalid_argument("lasso cycle must be nonempty");
    const std::size_t n = prefix.size() + cycle.size();
    const std::size_t q = a.nodes.size();
    auto letter = [&](std::size_t i) -> const Valuation& {
        return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()];
    };
    auto succ = [&](std::size_t i) { return i + 1 < n ? i + 1 : prefix.size(); };

    std::vector<char> seen(n * q, 0);
    std::vector<std::uint32_t> order;
    for (auto init : a.initial) {
        if (a.label_holds(init, letter(0)) && !seen[init]) {
            seen[init] = 1;
            order.push_back(init);
        }
    }
    std::vector<std::vector<std::uint32_t>> adj(n * q);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::uint32_t node = order[k];
        const std::size_t pos = node / q;
        const std::size_t next = succ(pos);
        for (auto t : a.nodes[node % q].successors) {
            if (!a.label_holds(t, letter(next))) continue;
            const auto id = static_cast<std::uint32_t>(next * q + t);
            adj[node].push_back(id);
            if (!seen[id]) {
                seen[id] = 1;
                order.push_back(id);
            }
        }
    }
    std::vector<std::uint64_t> offsets{0};
    std::vector<std::uint32_t> targets;
    for (const auto& row : adj) {
        targets.insert(targets.end(), row.begin(), row.end());
        offsets.push_back(targets.size());
    }
    const auto scc = tarjan_scc(offsets, targets);
    std::vector<std::vector<char>> hits(scc.count, std::vector<char>(a.acceptance.size(), 0));
    std::vector<char> cyclic(scc.count, 0);
    for (auto node : order) {
        const auto c = scc.component[node];
        if (nontrivial(scc, node, offsets, targets)) cyclic[c] = 1;
        for (std::size_t s = 0; s < a.acceptance.size(); ++s)
            if (std::binary_search(a.acceptance[s].begin(), a.acceptance[s].end(), node % q)) hits[c][s] = 1;
    }
    for (std::uint32_t c = 0; c < scc.count; ++c) {
        if (!cyclic[c]) continue;
        if (std::all_of(hits[c].begin(), hits[c].end(), [](char h) { return h != 0; })) return true;
    }
    return false;
}

std::string to_dot(const Gba& a) {
    std::ostringstream os;
    os << "digraph gba {\n  init [shape=point];\n";
    for (std::size_t q = 0; q < a.nodes.size(); ++q) {
        std::string label;
        for (const auto& l : a.nodes[q].label) {
            if (!label.empty()) label += " /\\ ";
            label += (l.positive ? "" : "neg ") + to_string(a.atoms[l.atom]);
        }
        if (label.empty()) label = "True";
        std::string sets;
        for (std::size_t s = 0; s < a.acceptance.size(); ++s)
            if (std::binary_search(a.acceptance[s].begin(), a.acceptance[s].end(), q))
                sets += (sets.empty() ? "" : ",") + std::to_string(s);
        std::string text = "q" + std::to_string(q) + ": " + label + (sets.empty() ? "" : " {" + sets + "}");
        std::string escaped;
        for (char ch : text) {
            if (ch == '"' || ch == '\\') escaped.push_back('\\');
            escaped.push_back(ch);
        }
        os << "  q" << q << " [label=\"" << escaped << "\"];\n";
    }
    for (auto i : a.initial) os << "  init -> q" << i << ";\n";
    for (std::size_t q = 0; q < a.nodes.size(); ++q)
        for (auto t : a.nodes[q].successors) os << "  q" << q << " -> q" << t << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace swapmc
