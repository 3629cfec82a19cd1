#include "swapmc/semantics.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>

#include "swapmc/parser.hpp"

namespace swapmc {

std::size_t StateHash::operator()(const State& s) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Value v : s.values) {
        h ^= static_cast<std::uint32_t>(v);
        h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
}

ModelError::ModelError(ValidationReport report)
    : std::runtime_error("model failed validation:\n" + report.to_string()), report_(std::move(report)) {}

namespace {

std::uint64_t hash_values(std::span<const Value> v) {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (Value x : v) {
        h ^= static_cast<std::uint32_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

Expr rename_params(const Expr& e, const std::map<std::string, std::string>& binding) {
    Expr out = e;
    if (out.op == ExprOp::Ident) {
        if (auto it = binding.find(out.name); it != binding.end()) out.name = it->second;
    }
    for (auto& a : out.args) a = rename_params(a, binding);
    return out;
}

void split_conjuncts(const Expr& e, std::vector<Expr>& out) {
    if (e.op == ExprOp::And) {
        split_conjuncts(e.args[0], out);
        split_conjuncts(e.args[1], out);
    } else {
        out.push_back(e);
    }
}

int max_var(const CExpr& e) {
    int m = (e.op == COp::Var) ? e.index : -1;
    for (const auto& k : e.kids) m = std::max(m, max_var(k));
    return m;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Ctx {
    const Value* state = nullptr;
    const Value* primed = nullptr;
    const std::uint16_t* profile = nullptr;
    int missing_agent = -1;
    bool strict = false;
};

Value saturate(Value v, Value lo, Value hi, bool strict) {
    if (v < lo || v > hi) {
        if (strict) throw RangeError("value " + std::to_string(v) + " outside [" + std::to_string(lo) + ".." +
                                     std::to_string(hi) + "]");
        return std::clamp(v, lo, hi);
    }
    return v;
}

Value ev(const CExpr& e, Ctx& c) {
    switch (e.op) {
    case COp::Const: return e.imm;
    case COp::Var: return c.state[e.index];
    case COp::Primed: return c.primed[e.index];
    case COp::Action: {
        const std::uint16_t chosen = c.profile ? c.profile[e.index] : kAnyAction;
        if (chosen == kAnyAction) {
            if (c.missing_agent < 0) c.missing_agent = e.index;
            return 0;
        }
        return chosen == e.imm ? 1 : 0;
    }
    case COp::Not: return ev(e.kids[0], c) ? 0 : 1;
    case COp::And: return (ev(e.kids[0], c) && ev(e.kids[1], c)) ? 1 : 0;
    case COp::Or: return (ev(e.kids[0], c) || ev(e.kids[1], c)) ? 1 : 0;
    case COp::Implies: return (!ev(e.kids[0], c) || ev(e.kids[1], c)) ? 1 : 0;
    case COp::Eq: return ev(e.kids[0], c) == ev(e.kids[1], c);
    case COp::Neq: return ev(e.kids[0], c) != ev(e.kids[1], c);
    case COp::Lt: return ev(e.kids[0], c) < ev(e.kids[1], c);
    case COp::Le: return ev(e.kids[0], c) <= ev(e.kids[1], c);
    case COp::Gt: return ev(e.kids[0], c) > ev(e.kids[1], c);
    case COp::Ge: return ev(e.kids[0], c) >= ev(e.kids[1], c);
    case COp::Add:
    case COp::Sub: {
        const Value a = ev(e.kids[0], c);
        const Value b = ev(e.kids[1], c);
        const Value r = e.op == COp::Add ? a + b : a - b;
        return e.clamp ? saturate(r, e.lo, e.hi, c.strict) : r;
    }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Statement execution over sets of states.  Returns early (leaving `out`
// incomplete) once an unassigned agent's action has been consulted.

using Vals = std::vector<Value>;

void sort_unique(std::vector<Vals>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

class Executor {
public:
    Executor(const Model& m, Ctx& c) : m_(m), c_(c) {}

    void run(const CStmt& st, const Vals& s, std::vector<Vals>& out) {
        if (c_.missing_agent >= 0) return;
        switch (st.kind) {
        case CStmt::Kind::Skip: out.push_back(s); break;
        case CStmt::Kind::Assign: {
            Value v = eval_in(st.value, s);
            const auto& info = m_.vars()[st.target];
            v = saturate(v, info.lo, info.hi, c_.strict);
            Vals next = s;
            next[st.target] = v;
            out.push_back(std::move(next));
            break;
        }
        case CStmt::Kind::Choice: {
            bool any = false;
            for (const auto& [guard, body] : st.branches) {
                if (!guard) continue;
                const bool holds = eval_in(*guard, s) != 0;
                if (c_.missing_agent >= 0) return;
                if (holds) {
                    any = true;
                    run(body, s, out);
                    if (c_.missing_agent >= 0) return;
                }
            }
            if (!any) {
                bool otherwise = false;
                for (const auto& [guard, body] : st.branches) {
                    if (guard) continue;
                    otherwise = true;
                    run(body, s, out);
                }
                if (!otherwise) out.push_back(s);
            }
            break;
        }
        case CStmt::Kind::Seq: {
            std::vector<Vals> cur{s};
            for (const auto& sub : st.body) {
                std::vector<Vals> next;
                for (const auto& x : cur) {
                    run(sub, x, next);
                    if (c_.missing_agent >= 0) return;
                }
                sort_unique(next);
                cur = std::move(next);
            }
            out.insert(out.end(), std::make_move_iterator(cur.begin()), std::make_move_iterator(cur.end()));
            break;
        }
        case CStmt::Kind::Nondet: {
            Vals cand = s;
            enumerate(st, 0, s, cand, out);
            break;
        }
        }
    }

private:
    Value eval_in(const CExpr& e, const Vals& s) {
        const Value* saved = c_.state;
        c_.state = s.data();
        const Value v = ev(e, c_);
        c_.state = saved;
        return v;
    }

    void enumerate(const CStmt& st, std::size_t k, const Vals& s, Vals& cand, std::vector<Vals>& out) {
        if (c_.missing_agent >= 0) return;
        if (k == st.vars.size()) {
            const Value* saved_state = c_.state;
            const Value* saved_primed = c_.primed;
            c_.state = s.data();
            c_.primed = cand.data();
            const bool ok = ev(st.value, c_) != 0;
            c_.state = saved_state;
            c_.primed = saved_primed;
            if (ok && c_.missing_agent < 0) out.push_back(cand);
            return;
        }
        const int var = st.vars[k];
        const auto& info = m_.vars()[var];
        for (Value v = info.lo; v <= info.hi; ++v) {
            cand[var] = v;
            enumerate(st, k + 1, s, cand, out);
        }
        cand[var] = s[var];
    }

    const Model& m_;
    Ctx& c_;
};

void collect_rules(const std::vector<CRule>& rules, Ctx& c, std::vector<int>& out, int skip) {
    bool any = false;
    for (const auto& r : rules) {
        if (!r.guard || !ev(*r.guard, c)) continue;
        any = true;
        if (r.action >= 0)
            out.push_back(r.action);
        else
            collect_rules(r.nested, c, out, skip);
    }
    if (any) return;
    bool otherwise = false;
    for (const auto& r : rules) {
        if (r.guard) continue;
        otherwise = true;
        if (r.action >= 0)
            out.push_back(r.action);
        else
            collect_rules(r.nested, c, out, skip);
    }
    if (!otherwise) out.push_back(skip);
}

std::string escape_dot(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out.push_back('\\');
        if (ch == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(ch);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model

Model Model::compile(const ModelIR& ir, EvalOptions opts) {
    ValidationReport report = validate_model(ir);
    if (!report.ok()) throw ModelError(std::move(report));

    Model m;
    m.ir_ = ir;
    m.report_ = std::move(report);
    m.opts_ = opts;

    for (const auto& v : ir.vars) {
        VarInfo info;
        info.name = v.name;
        info.type = *resolve_type(ir, v.type);
        switch (info.type.kind) {
        case ValueType::Kind::Bool:
            info.lo = 0;
            info.hi = 1;
            break;
        case ValueType::Kind::Enum: {
            const auto& en = ir.types[info.type.type_index].enumeration;
            info.constants = en.constants;
            info.lo = 0;
            info.hi = static_cast<Value>(en.constants.size()) - 1;
            break;
        }
        case ValueType::Kind::Int: {
            const auto& r = ir.types[info.type.type_index].range;
            info.lo = r.lo;
            info.hi = r.hi;
            break;
        }
        }
        m.vars_.push_back(std::move(info));
    }

    // Agents need their action lists before any transition code is compiled.
    for (const auto& a : ir.agents) {
        AgentInfo info;
        info.name = a.name;
        const auto* proto = ir.find_protocol(a.protocol);
        info.actions = protocol_actions(*proto);
        auto skip = std::find(info.actions.begin(), info.actions.end(), kSkipAction);
        if (skip == info.actions.end()) {
            info.actions.push_back(kSkipAction);
            skip = info.actions.end() - 1;
        }
        info.skip_action = static_cast<int>(skip - info.actions.begin());
        m.agents_.push_back(std::move(info));
    }
    for (std::size_t i = 0; i < ir.agents.size(); ++i) {
        const auto& a = ir.agents[i];
        const auto* proto = ir.find_protocol(a.protocol);
        std::map<std::string, std::string> binding;
        for (std::size_t k = 0; k < proto->params.size(); ++k) binding[proto->params[k].name] = a.bindings[k];
        std::function<std::vector<CRule>(const std::vector<ProtocolRule>&)> compile_rules =
            [&](const std::vector<ProtocolRule>& rules) {
                std::vector<CRule> out;
                for (const auto& r : rules) {
                    CRule c;
                    if (r.guard) c.guard = m.compile_expr(rename_params(*r.guard, binding));
                    if (r.is_nested())
                        c.nested = compile_rules(r.nested);
                    else
                        c.action = m.action_index(static_cast<int>(i), r.action);
                    out.push_back(std::move(c));
                }
                return out;
            };
        m.agents_[i].rules = compile_rules(proto->rules);
    }

    if (ir.init_cond) {
        std::vector<Expr> parts;
        split_conjuncts(expand_defines(*ir.init_cond, ir), parts);
        for (const auto& p : parts) m.init_conjuncts_.push_back(m.compile_expr(p));
    }
    if (ir.transitions) m.transitions_ = m.compile_statement(*ir.transitions);
    for (const auto& f : ir.fairness) m.fairness_.push_back(m.compile_expr(f.condition));
    for (const auto& s : ir.specs) {
        SpecDecl d = s;
        d.body = expand_defines(s.body, ir);
        m.specs_.push_back(std::move(d));
    }
    return m;
}

int Model::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i].name == name) return static_cast<int>(i);
    return -1;
}

int Model::agent_index(const std::string& name) const {
    for (std::size_t i = 0; i < agents_.size(); ++i)
        if (agents_[i].name == name) return static_cast<int>(i);
    return -1;
}

int Model::action_index(int agent, const std::string& action) const {
    const auto& acts = agents_[agent].actions;
    auto it = std::find(acts.begin(), acts.end(), action);
    return it == acts.end() ? -1 : static_cast<int>(it - acts.begin());
}

CExpr Model::compile_expr(const Expr& raw) const {
    const Expr e = expand_defines(raw, ir_);
    CExpr c;
    auto int_range = [&](const CExpr& k) -> std::optional<std::pair<Value, Value>> {
        if ((k.op == COp::Var || k.op == COp::Primed) && vars_[k.index].type.kind == ValueType::Kind::Int)
            return std::pair{vars_[k.index].lo, vars_[k.index].hi};
        if ((k.op == COp::Add || k.op == COp::Sub) && k.clamp) return std::pair{k.lo, k.hi};
        return std::nullopt;
    };
    switch (e.op) {
    case ExprOp::BoolLit:
    case ExprOp::IntLit:
        c.op = COp::Const;
        c.imm = static_cast<Value>(e.value);
        return c;
    case ExprOp::Ident: {
        if (int v = var_index(e.name); v >= 0) {
            c.op = COp::Var;
            c.index = v;
            return c;
        }
        for (const auto& t : ir_.types) {
            if (t.kind != TypeDecl::Kind::Enum) continue;
            const auto& cs = t.enumeration.constants;
            if (auto it = std::find(cs.begin(), cs.end(), e.name); it != cs.end()) {
                c.op = COp::Const;
                c.imm = static_cast<Value>(it - cs.begin());
                return c;
            }
        }
        throw std::invalid_argument("unresolved name '" + e.name + "'");
    }
    case ExprOp::Primed:
        c.op = COp::Primed;
        c.index = var_index(e.name);
        if (c.index < 0) throw std::invalid_argument("unresolved primed name '" + e.name + "'");
        return c;
    case ExprOp::Action:
        c.op = COp::Action;
        c.index = agent_index(e.name);
        if (c.index < 0) throw std::invalid_argument("unknown agent '" + e.name + "'");
        c.imm = action_index(c.index, e.member);
        if (c.imm < 0) throw std::invalid_argument("unknown action '" + e.name + "." + e.member + "'");
        return c;
    default: break;
    }
    static const std::map<ExprOp, COp> ops = {
        {ExprOp::Not, COp::Not}, {ExprOp::And, COp::And}, {ExprOp::Or, COp::Or}, {ExprOp::Implies, COp::Implies},
        {ExprOp::Eq, COp::Eq},   {ExprOp::Neq, COp::Neq}, {ExprOp::Lt, COp::Lt}, {ExprOp::Le, COp::Le},
        {ExprOp::Gt, COp::Gt},   {ExprOp::Ge, COp::Ge},   {ExprOp::Add, COp::Add}, {ExprOp::Sub, COp::Sub},
    };
    c.op = ops.at(e.op);
    for (const auto& a : e.args) c.kids.push_back(compile_expr(a));
    if (c.op == COp::Add || c.op == COp::Sub) {
        auto r = int_range(c.kids[0]);
        if (!r) r = int_range(c.kids[1]);
        if (r) {
            c.clamp = true;
            c.lo = r->first;
            c.hi = r->second;
        }
    }
    return c;
}

CStmt Model::compile_statement(const Statement& s) const {
    CStmt c;
    switch (s.kind) {
    case Statement::Kind::Skip: c.kind = CStmt::Kind::Skip; break;
    case Statement::Kind::Assign:
        c.kind = CStmt::Kind::Assign;
        c.target = var_index(s.target);
        if (c.target < 0) throw std::invalid_argument("assignment to undeclared '" + s.target + "'");
        c.value = compile_expr(s.value);
        break;
    case Statement::Kind::Choice:
        c.kind = CStmt::Kind::Choice;
        for (const auto& b : s.branches) {
            std::optional<CExpr> g;
            if (b.guard) g = compile_expr(*b.guard);
            c.branches.emplace_back(std::move(g), compile_statement(b.body));
        }
        break;
    case Statement::Kind::Seq:
        c.kind = CStmt::Kind::Seq;
        for (const auto& b : s.body) c.body.push_back(compile_statement(b));
        break;
    case Statement::Kind::Nondet:
        c.kind = CStmt::Kind::Nondet;
        for (const auto& v : s.vars) {
            c.vars.push_back(var_index(v));
            if (c.vars.back() < 0) throw std::invalid_argument("undeclared variable '" + v + "'");
        }
        c.value = compile_expr(s.value);
        break;
    }
    return c;
}

std::string Model::format_value(int var, Value v) const {
    const auto& info = vars_[var];
    switch (info.type.kind) {
    case ValueType::Kind::Bool: return v ? "True" : "False";
    case ValueType::Kind::Enum:
        return (v >= 0 && v < static_cast<Value>(info.constants.size())) ? info.constants[v] : "?" + std::to_string(v);
    case ValueType::Kind::Int: return std::to_string(v);
    }
    return "?";
}

std::string Model::format_state(const State& s) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < vars_.size() && i < s.values.size(); ++i)
        os << (i ? " " : "") << vars_[i].name << "=" << format_value(static_cast<int>(i), s.values[i]);
    return os.str();
}

std::string Model::format_profile(const ActionProfile& p) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < agents_.size() && i < p.actions.size(); ++i) {
        os << (i ? " " : "") << agents_[i].name << ".";
        if (p.actions[i] == kAnyAction)
            os << "*";
        else
            os << agents_[i].actions[p.actions[i]];
    }
    return os.str();
}

bool Model::in_domain(const State& s) const {
    if (s.values.size() != vars_.size()) return false;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (s.values[i] < vars_[i].lo || s.values[i] > vars_[i].hi) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Operations

Value eval(const Model& m, const CExpr& e, const State& s) {
    Ctx c;
    c.state = s.values.data();
    c.strict = m.options().strict_arithmetic;
    return ev(e, c);
}

Value eval_expr(const Model& m, const Expr& e, const State& s, const ActionProfile* profile, const State* primed) {
    const CExpr ce = m.compile_expr(e);
    Ctx c;
    c.state = s.values.data();
    c.primed = primed ? primed->values.data() : nullptr;
    c.profile = profile ? profile->actions.data() : nullptr;
    c.strict = m.options().strict_arithmetic;
    const Value v = ev(ce, c);
    if (c.missing_agent >= 0) throw std::invalid_argument("action proposition evaluated without an action profile");
    return v;
}

std::vector<State> initial_states(const Model& m) {
    const std::size_t n = m.vars().size();
    // Bucket each init conjunct by the last variable it reads, so it is
    // checked as soon as that variable is assigned.
    std::vector<std::vector<const CExpr*>> at_var(n + 1);
    for (const auto& c : m.init_conjuncts()) {
        const int mv = max_var(c);
        at_var[mv < 0 ? n : static_cast<std::size_t>(mv)].push_back(&c);
    }
    std::vector<State> out;
    State s;
    s.values.assign(n, 0);
    Ctx ctx;
    ctx.state = s.values.data();
    ctx.strict = m.options().strict_arithmetic;
    for (const auto* c : at_var[n])
        if (!ev(*c, ctx)) return out;

    std::function<void(std::size_t)> assign = [&](std::size_t k) {
        if (k == n) {
            out.push_back(s);
            return;
        }
        for (Value v = m.vars()[k].lo; v <= m.vars()[k].hi; ++v) {
            s.values[k] = v;
            bool ok = true;
            for (const auto* c : at_var[k]) {
                if (!ev(*c, ctx)) {
                    ok = false;
                    break;
                }
            }
            if (ok) assign(k + 1);
        }
    };
    assign(0);
    return out;
}

std::vector<int> enabled_actions(const Model& m, int agent, const State& s) {
    const auto& info = m.agents().at(agent);
    Ctx c;
    c.state = s.values.data();
    c.strict = m.options().strict_arithmetic;
    std::vector<int> out;
    collect_rules(info.rules, c, out, info.skip_action);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> enabled_action_names(const Model& m, const std::string& agent, const State& s) {
    const int a = m.agent_index(agent);
    if (a < 0) throw std::invalid_argument("unknown agent '" + agent + "'");
    std::vector<std::string> out;
    for (int act : enabled_actions(m, a, s)) out.push_back(m.agents()[a].actions[act]);
    return out;
}

std::vector<State> exec_statement(const Model& m, const CStmt& stmt, const State& s, const ActionProfile& profile) {
    Ctx c;
    c.state = s.values.data();
    c.profile = profile.actions.empty() ? nullptr : profile.actions.data();
    c.strict = m.options().strict_arithmetic;
    Executor ex(m, c);
    std::vector<Vals> out;
    ex.run(stmt, s.values, out);
    if (c.missing_agent >= 0) throw std::invalid_argument("statement reads an action the profile does not fix");
    sort_unique(out);
    std::vector<State> states;
    states.reserve(out.size());
    for (auto& v : out) states.push_back(State{std::move(v)});
    return states;
}

std::vector<State> exec_statement(const Model& m, const Statement& stmt, const State& s, const ActionProfile& profile) {
    return exec_statement(m, m.compile_statement(stmt), s, profile);
}

std::vector<PartialTransitions> partial_successors(const Model& m, const State& s) {
    const std::size_t agents = m.agents().size();
    std::vector<std::vector<int>> enabled(agents);
    for (std::size_t a = 0; a < agents; ++a) enabled[a] = enabled_actions(m, static_cast<int>(a), s);

    std::vector<PartialTransitions> out;
    std::vector<ActionProfile> work;
    work.push_back(ActionProfile{std::vector<std::uint16_t>(agents, kAnyAction)});
    while (!work.empty()) {
        ActionProfile p = std::move(work.back());
        work.pop_back();
        Ctx c;
        c.state = s.values.data();
        c.profile = p.actions.data();
        c.strict = m.options().strict_arithmetic;
        Executor ex(m, c);
        std::vector<Vals> res;
        ex.run(m.transitions(), s.values, res);
        if (c.missing_agent >= 0) {
            const int a = c.missing_agent;
            // Push in reverse so that lower action indices are explored first.
            for (auto it = enabled[a].rbegin(); it != enabled[a].rend(); ++it) {
                ActionProfile q = p;
                q.actions[a] = static_cast<std::uint16_t>(*it);
                work.push_back(std::move(q));
            }
            continue;
        }
        sort_unique(res);
        PartialTransitions pt;
        pt.profile = std::move(p);
        for (auto& v : res) pt.targets.push_back(State{std::move(v)});
        out.push_back(std::move(pt));
    }
    std::sort(out.begin(), out.end(),
              [](const PartialTransitions& x, const PartialTransitions& y) { return x.profile < y.profile; });
    return out;
}

std::vector<Transition> successors(const Model& m, const State& s) {
    const std::size_t agents = m.agents().size();
    std::vector<std::vector<int>> enabled(agents);
    for (std::size_t a = 0; a < agents; ++a) enabled[a] = enabled_actions(m, static_cast<int>(a), s);

    std::vector<Transition> out;
    for (const auto& pt : partial_successors(m, s)) {
        // Expand every unconsulted agent over its enabled actions.
        std::function<void(std::size_t, ActionProfile&)> expand = [&](std::size_t a, ActionProfile& p) {
            if (a == agents) {
                for (const auto& t : pt.targets) out.push_back(Transition{p, t});
                return;
            }
            if (pt.profile.actions[a] != kAnyAction) {
                expand(a + 1, p);
                return;
            }
            for (int act : enabled[a]) {
                p.actions[a] = static_cast<std::uint16_t>(act);
                expand(a + 1, p);
            }
            p.actions[a] = kAnyAction;
        };
        ActionProfile p = pt.profile;
        expand(0, p);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// StateGraph

State StateGraph::state(std::uint32_t node) const {
    auto v = values(node);
    return State{std::vector<Value>(v.begin(), v.end())};
}

void StateGraph::grow_index() {
    std::vector<std::uint32_t> fresh(std::max<std::size_t>(64, slots_.size() * 2), 0);
    const std::size_t mask = fresh.size() - 1;
    const std::size_t n = node_count();
    for (std::size_t id = 0; id < n; ++id) {
        std::size_t h = hash_values(values(static_cast<std::uint32_t>(id))) & mask;
        while (fresh[h] != 0) h = (h + 1) & mask;
        fresh[h] = static_cast<std::uint32_t>(id + 1);
    }
    slots_ = std::move(fresh);
}

std::uint32_t StateGraph::lookup_or_insert(std::span<const Value> v, bool& inserted) {
    if ((node_count() + 1) * 2 > slots_.size()) grow_index();
    const std::size_t mask = slots_.size() - 1;
    std::size_t h = hash_values(v) & mask;
    while (slots_[h] != 0) {
        const std::uint32_t id = slots_[h] - 1;
        auto have = values(id);
        if (std::equal(have.begin(), have.end(), v.begin(), v.end())) {
            inserted = false;
            return id;
        }
        h = (h + 1) & mask;
    }
    const auto id = static_cast<std::uint32_t>(node_count());
    values_.insert(values_.end(), v.begin(), v.end());
    initial_flags_.push_back(0);
    slots_[h] = id + 1;
    inserted = true;
    return id;
}

std::int64_t StateGraph::find(const State& s) const {
    if (s.values.size() != width_ || slots_.empty()) return -1;
    const std::size_t mask = slots_.size() - 1;
    std::size_t h = hash_values(s.values) & mask;
    while (slots_[h] != 0) {
        const std::uint32_t id = slots_[h] - 1;
        auto have = values(id);
        if (std::equal(have.begin(), have.end(), s.values.begin(), s.values.end())) return id;
        h = (h + 1) & mask;
    }
    return -1;
}

int StateGraph::atom_slot(const Expr& expanded_atom) const {
    for (std::size_t i = 0; i < atom_exprs_.size(); ++i)
        if (atom_exprs_[i] == expanded_atom) return static_cast<int>(i);
    return -1;
}

namespace {

struct Expansion {
    std::vector<State> targets;
    std::uint64_t transitions = 0;
};

Expansion expand_node(const Model& m, const State& s) {
    const std::size_t agents = m.agents().size();
    std::vector<std::uint64_t> choices(agents, 1);
    for (std::size_t a = 0; a < agents; ++a) choices[a] = enabled_actions(m, static_cast<int>(a), s).size();
    Expansion e;
    for (auto& pt : partial_successors(m, s)) {
        std::uint64_t mult = 1;
        for (std::size_t a = 0; a < agents; ++a)
            if (pt.profile.actions[a] == kAnyAction) mult *= choices[a];
        e.transitions += mult * pt.targets.size();
        for (auto& t : pt.targets) e.targets.push_back(std::move(t));
    }
    std::sort(e.targets.begin(), e.targets.end());
    e.targets.erase(std::unique(e.targets.begin(), e.targets.end()), e.targets.end());
    return e;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void collect_atoms(const Formula& f, std::vector<Expr>& out) {
    switch (f.op()) {
    case LtlOp::True:
    case LtlOp::False: return;
    case LtlOp::Atom:
        if (std::find(out.begin(), out.end(), f.atom_expr()) == out.end()) out.push_back(f.atom_expr());
        return;
    default:
        collect_atoms(f.lhs(), out);
        if (f.is_binary()) collect_atoms(f.rhs(), out);
    }
}

}  // namespace

StateGraph build_graph(const Model& m, const GraphOptions& opts) {
    StateGraph g;
    g.width_ = m.vars().size();
    const auto inits = initial_states(m);
    if (inits.empty()) throw std::invalid_argument("model has no initial state (init_cond is unsatisfiable)");

    auto check_budget = [&] {
        if (g.node_count() > opts.node_budget)
            throw ResourceError("node budget of " + std::to_string(opts.node_budget) + " states exceeded");
    };
    for (const auto& s : inits) {
        bool inserted = false;
        const auto id = g.lookup_or_insert(s.values, inserted);
        if (inserted) {
            g.initial_.push_back(id);
            g.initial_flags_[id] = 1;
        }
        check_budget();
    }
    g.offsets_.push_back(0);

    std::size_t level_begin = 0;
    while (level_begin < g.node_count()) {
        const std::size_t level_end = g.node_count();
        std::vector<Expansion> results(level_end - level_begin);
        std::vector<State> frontier;
        frontier.reserve(results.size());
        for (std::size_t id = level_begin; id < level_end; ++id) frontier.push_back(g.state(static_cast<std::uint32_t>(id)));
        parallel_for(results.size(), opts.threads, [&](std::size_t i) { results[i] = expand_node(m, frontier[i]); });
        for (auto& r : results) {
            std::vector<std::uint32_t> ids;
            ids.reserve(r.targets.size());
            for (const auto& t : r.targets) {
                bool inserted = false;
                ids.push_back(g.lookup_or_insert(t.values, inserted));
                if (inserted) check_budget();
            }
            std::sort(ids.begin(), ids.end());
            g.targets_.insert(g.targets_.end(), ids.begin(), ids.end());
            g.offsets_.push_back(g.targets_.size());
            g.transition_count_ += r.transitions;
        }
        level_begin = level_end;
    }

    const std::size_t n = g.node_count();
    for (const auto& f : m.fairness()) {
        std::vector<char> truth(n);
        for (std::size_t id = 0; id < n; ++id) truth[id] = eval(m, f, g.state(static_cast<std::uint32_t>(id))) != 0;
        g.fairness_.push_back(std::move(truth));
    }
    for (const auto& s : m.specs()) collect_atoms(s.body, g.atom_exprs_);
    for (const auto& e : opts.extra_atoms) {
        Expr x = expand_defines(e, m.ir());
        if (std::find(g.atom_exprs_.begin(), g.atom_exprs_.end(), x) == g.atom_exprs_.end()) g.atom_exprs_.push_back(x);
    }
    for (const auto& a : g.atom_exprs_) {
        const CExpr c = m.compile_expr(a);
        std::vector<char> truth(n);
        parallel_for(n, opts.threads, [&](std::size_t id) {
            truth[id] = eval(m, c, g.state(static_cast<std::uint32_t>(id))) != 0;
        });
        g.atom_truth_.push_back(std::move(truth));
    }
    return g;
}

std::vector<std::pair<ActionProfile, std::uint32_t>> edges_from(const Model& m, const StateGraph& g,
                                                                std::uint32_t node) {
    std::vector<std::pair<ActionProfile, std::uint32_t>> out;
    for (auto& t : successors(m, g.state(node))) {
        const auto id = g.find(t.target);
        if (id < 0) throw std::logic_error("successor missing from graph");
        out.emplace_back(std::move(t.profile), static_cast<std::uint32_t>(id));
    }
    return out;
}

std::string to_dot(const Model& m, const StateGraph& g) {
    std::ostringstream os;
    os << "digraph swapmc {\n";
    for (std::uint32_t id = 0; id < g.node_count(); ++id) {
        const State s = g.state(id);
        std::string label;
        for (std::size_t v = 0; v < m.vars().size(); ++v) {
            if (v) label += "\n";
            label += m.vars()[v].name + "=" + m.format_value(static_cast<int>(v), s.values[v]);
        }
        os << "  n" << id << " [label=\"" << escape_dot(label) << "\"" << (g.is_initial(id) ? ", peripheries=2" : "")
           << "];\n";
    }
    for (std::uint32_t id = 0; id < g.node_count(); ++id) {
        for (const auto& pt : partial_successors(m, g.state(id))) {
            const std::string label = escape_dot(m.format_profile(pt.profile));
            for (const auto& t : pt.targets) {
                os << "  n" << id << " -> n" << g.find(t) << " [label=\"" << label << "\"];\n";
            }
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace swapmc
