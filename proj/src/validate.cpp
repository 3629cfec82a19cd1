#include "swapmc/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace swapmc {

std::size_t ValidationReport::error_count() const {
    return std::count_if(diagnostics.begin(), diagnostics.end(),
                         [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::size_t ValidationReport::warning_count() const { return diagnostics.size() - error_count(); }

std::vector<Diagnostic> ValidationReport::errors() const {
    std::vector<Diagnostic> out;
    for (const auto& d : diagnostics)
        if (d.severity == Severity::Error) out.push_back(d);
    return out;
}

std::vector<Diagnostic> ValidationReport::warnings() const {
    std::vector<Diagnostic> out;
    for (const auto& d : diagnostics)
        if (d.severity == Severity::Warning) out.push_back(d);
    return out;
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& d : diagnostics) {
        os << d.span.line << ":" << d.span.column << ": " << (d.severity == Severity::Error ? "error" : "warning")
           << ": " << d.message << "\n";
    }
    return os.str();
}

bool is_reserved_word(const std::string& s) {
    static const std::set<std::string> words = {
        "A",      "G",    "F",     "X",     "U",         "W",           "type",     "define", "init_cond",
        "agent",  "transitions", "fairness", "spec_obs", "protocol", "begin", "end",      "if",     "fi",
        "do",     "od",   "skip",  "otherwise", "neg",   "True",        "False",    "Bool"};
    return words.count(s) > 0;
}

std::optional<ValueType> resolve_type(const ModelIR& m, const std::string& name) {
    if (name == kBoolType) return ValueType{ValueType::Kind::Bool, -1};
    for (std::size_t i = 0; i < m.types.size(); ++i) {
        if (m.types[i].name() == name) {
            auto kind = m.types[i].kind == TypeDecl::Kind::Enum ? ValueType::Kind::Enum : ValueType::Kind::Int;
            return ValueType{kind, static_cast<int>(i)};
        }
    }
    return std::nullopt;
}

namespace {

struct Interval {
    std::int64_t lo;
    std::int64_t hi;
};

// Where an expression appears; decides which names and forms are legal.
struct Scope {
    enum class Kind { State, Protocol };
    Kind kind = Kind::State;
    const ProtocolDecl* protocol = nullptr;
    bool allow_actions = false;
    const std::vector<std::string>* primed = nullptr;  // legal primed names
};

class Validator {
public:
    explicit Validator(const ModelIR& m) : m_(m) {}

    ValidationReport run() {
        collect_symbols();
        check_defines();
        check_init();
        check_protocols();
        check_agents();
        check_transitions();
        check_fairness();
        check_specs();
        return std::move(report_);
    }

private:
    struct Constant {
        int type_index;
        int index;
    };

    void error(SourceSpan at, std::string msg) { report_.diagnostics.push_back({Severity::Error, at, std::move(msg)}); }
    void warning(SourceSpan at, std::string msg) {
        report_.diagnostics.push_back({Severity::Warning, at, std::move(msg)});
    }

    void claim_name(const std::string& name, SourceSpan at, const char* what) {
        if (is_reserved_word(name)) {
            error(at, std::string(what) + " name '" + name + "' is a reserved word");
            return;
        }
        auto [it, inserted] = names_.emplace(name, what);
        if (!inserted) error(at, "duplicate name '" + name + "' (already declared as " + it->second + ")");
    }

    void collect_symbols() {
        std::set<std::string> type_names;
        for (std::size_t i = 0; i < m_.types.size(); ++i) {
            const auto& t = m_.types[i];
            const auto at = t.origin.span;
            if (!type_names.insert(t.name()).second || t.name() == kBoolType)
                error(at, "duplicate type '" + t.name() + "'");
            if (t.kind == TypeDecl::Kind::Enum) {
                if (t.enumeration.constants.empty()) error(at, "enumerated type '" + t.name() + "' has no constants");
                for (std::size_t k = 0; k < t.enumeration.constants.size(); ++k) {
                    const auto& c = t.enumeration.constants[k];
                    claim_name(c, at, "constant");
                    constants_.emplace(c, Constant{static_cast<int>(i), static_cast<int>(k)});
                }
            } else if (t.range.lo > t.range.hi) {
                error(at, "empty range in type '" + t.name() + "'");
            }
        }
        for (const auto& v : m_.vars) {
            claim_name(v.name, v.origin.span, "variable");
            if (!resolve_type(m_, v.type)) error(v.origin.span, "unknown type '" + v.type + "' for variable '" + v.name + "'");
        }
        for (const auto& d : m_.defines) claim_name(d.name, d.origin.span, "define");
        for (const auto& a : m_.agents) claim_name(a.name, a.origin.span, "agent");
        std::set<std::string> protos;
        for (const auto& p : m_.protocols)
            if (!protos.insert(p.name).second) error(p.origin.span, "duplicate protocol \"" + p.name + "\"");
    }

    // --- expression typing -------------------------------------------------

    std::optional<ValueType> var_type(const std::string& name) const {
        const auto* v = m_.find_var(name);
        return v ? resolve_type(m_, v->type) : std::nullopt;
    }

    std::optional<Interval> domain_interval(const ValueType& t) const {
        if (t.kind != ValueType::Kind::Int || t.type_index < 0) return std::nullopt;
        const auto& r = m_.types[t.type_index].range;
        return Interval{r.lo, r.hi};
    }

    static bool is_int(const ValueType& t) { return t.kind == ValueType::Kind::Int; }

    std::string describe(const ValueType& t) const {
        switch (t.kind) {
        case ValueType::Kind::Bool: return "Bool";
        case ValueType::Kind::Enum: return m_.types[t.type_index].name();
        case ValueType::Kind::Int: return t.type_index < 0 ? "integer" : m_.types[t.type_index].name();
        }
        return "?";
    }

    struct Typed {
        ValueType type;
        std::optional<Interval> range;  // for integers
    };

    std::optional<Typed> type_of(const Expr& e, const Scope& sc) {
        const auto at = e.origin.span;
        switch (e.op) {
        case ExprOp::BoolLit: return Typed{{ValueType::Kind::Bool, -1}, std::nullopt};
        case ExprOp::IntLit: return Typed{{ValueType::Kind::Int, -1}, Interval{e.value, e.value}};
        case ExprOp::Ident: return type_of_ident(e, sc);
        case ExprOp::Primed: {
            if (!sc.primed) {
                error(at, "primed reference '" + e.name + "'' outside a nondeterministic assignment");
                return std::nullopt;
            }
            if (std::find(sc.primed->begin(), sc.primed->end(), e.name) == sc.primed->end()) {
                error(at, "primed reference '" + e.name + "'' does not name an assigned variable");
                return std::nullopt;
            }
            auto t = var_type(e.name);
            if (!t) return std::nullopt;
            return Typed{*t, domain_interval(*t)};
        }
        case ExprOp::Action: {
            if (!sc.allow_actions) {
                error(at, "action proposition '" + e.name + "." + e.member + "' outside the transitions block");
                return std::nullopt;
            }
            const auto* agent = m_.find_agent(e.name);
            if (!agent) {
                error(at, "unknown agent '" + e.name + "' in action proposition");
                return std::nullopt;
            }
            const auto* proto = m_.find_protocol(agent->protocol);
            if (proto) {
                auto acts = protocol_actions(*proto);
                if (e.member != kSkipAction && std::find(acts.begin(), acts.end(), e.member) == acts.end())
                    error(at, "agent '" + e.name + "' has no action '" + e.member + "'");
            }
            return Typed{{ValueType::Kind::Bool, -1}, std::nullopt};
        }
        case ExprOp::Not: {
            auto a = type_of(e.args[0], sc);
            if (a && a->type.kind != ValueType::Kind::Bool) error(at, "operand of neg must be Bool, got " + describe(a->type));
            return Typed{{ValueType::Kind::Bool, -1}, std::nullopt};
        }
        case ExprOp::And:
        case ExprOp::Or:
        case ExprOp::Implies: {
            for (const auto& arg : e.args) {
                auto a = type_of(arg, sc);
                if (a && a->type.kind != ValueType::Kind::Bool)
                    error(arg.origin.span, std::string("operand of ") + op_symbol(e.op) + " must be Bool, got " +
                                               describe(a->type));
            }
            return Typed{{ValueType::Kind::Bool, -1}, std::nullopt};
        }
        case ExprOp::Eq:
        case ExprOp::Neq:
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: {
            auto a = type_of(e.args[0], sc);
            auto b = type_of(e.args[1], sc);
            if (a && b) {
                const bool ordering = e.op != ExprOp::Eq && e.op != ExprOp::Neq;
                if (ordering && !(is_int(a->type) && is_int(b->type))) {
                    error(at, std::string("ordering comparison ") + op_symbol(e.op) + " requires integers");
                } else if (!comparable(a->type, b->type)) {
                    error(at, "cannot compare " + describe(a->type) + " with " + describe(b->type));
                }
            }
            return Typed{{ValueType::Kind::Bool, -1}, std::nullopt};
        }
        case ExprOp::Add:
        case ExprOp::Sub: {
            auto a = type_of(e.args[0], sc);
            auto b = type_of(e.args[1], sc);
            if (!a || !b) return std::nullopt;
            if (!is_int(a->type) || !is_int(b->type)) {
                error(at, std::string("arithmetic ") + op_symbol(e.op) + " requires integers");
                return std::nullopt;
            }
            ValueType result = a->type.type_index >= 0 ? a->type : b->type;
            Interval raw = e.op == ExprOp::Add ? Interval{a->range->lo + b->range->lo, a->range->hi + b->range->hi}
                                               : Interval{a->range->lo - b->range->hi, a->range->hi - b->range->lo};
            auto dom = domain_interval(result);
            if (!dom) return Typed{result, raw};
            if (raw.lo < dom->lo || raw.hi > dom->hi) {
                warning(at, "arithmetic may exceed IntRange " + describe(result) + " (saturates at bounds)");
            }
            return Typed{result, Interval{std::max(raw.lo, dom->lo), std::min(raw.hi, dom->hi)}};
        }
        }
        return std::nullopt;
    }

    static bool comparable(const ValueType& a, const ValueType& b) {
        if (a.kind != b.kind) return false;
        if (a.kind == ValueType::Kind::Enum) return a.type_index == b.type_index;
        return true;
    }

    std::optional<Typed> type_of_ident(const Expr& e, const Scope& sc) {
        const auto at = e.origin.span;
        if (sc.kind == Scope::Kind::Protocol) {
            for (const auto& p : sc.protocol->params) {
                if (p.name == e.name) {
                    auto t = resolve_type(m_, p.type);
                    if (!t) return std::nullopt;
                    return Typed{*t, domain_interval(*t)};
                }
            }
        } else {
            if (auto t = var_type(e.name)) return Typed{*t, domain_interval(*t)};
            if (m_.find_var(e.name)) return std::nullopt;  // unknown type already reported
            if (const auto* d = m_.find_define(e.name)) return define_type(*d);
        }
        if (auto c = constants_.find(e.name); c != constants_.end())
            return Typed{{ValueType::Kind::Enum, c->second.type_index}, std::nullopt};
        if (sc.kind == Scope::Kind::Protocol)
            error(at, "'" + e.name + "' is not a parameter of protocol \"" + sc.protocol->name + "\" or a constant");
        else
            error(at, "unresolved name '" + e.name + "'");
        return std::nullopt;
    }

    std::optional<Typed> define_type(const DefineDecl& d) {
        if (auto it = define_types_.find(d.name); it != define_types_.end()) return it->second;
        if (in_progress_.count(d.name)) return std::nullopt;  // cycle reported separately
        in_progress_.insert(d.name);
        Scope sc;
        auto t = type_of(d.body, sc);
        in_progress_.erase(d.name);
        define_types_[d.name] = t;
        return t;
    }

    bool require_bool(const Expr& e, const Scope& sc, const std::string& what) {
        auto t = type_of(e, sc);
        if (t && t->type.kind != ValueType::Kind::Bool) {
            error(e.origin.span, what + " must be Bool, got " + describe(t->type));
            return false;
        }
        return t.has_value();
    }

    // --- declarations ------------------------------------------------------

    void collect_define_refs(const Expr& e, std::vector<std::string>& out) const {
        if (e.op == ExprOp::Ident && m_.find_define(e.name)) out.push_back(e.name);
        for (const auto& a : e.args) collect_define_refs(a, out);
    }

    void check_defines() {
        // Cycle detection over define -> define references.
        std::map<std::string, int> color;
        std::function<bool(const DefineDecl&)> visit = [&](const DefineDecl& d) {
            color[d.name] = 1;
            std::vector<std::string> refs;
            collect_define_refs(d.body, refs);
            for (const auto& r : refs) {
                if (color[r] == 1) {
                    error(d.origin.span, "cyclic define chain through '" + r + "'");
                    return false;
                }
                if (color[r] == 0 && !visit(*m_.find_define(r))) return false;
            }
            color[d.name] = 2;
            return true;
        };
        for (const auto& d : m_.defines) {
            if (color[d.name] == 0 && !visit(d)) {
                cyclic_ = true;
                return;
            }
        }
        for (const auto& d : m_.defines) define_type(d);
    }

    void check_init() {
        if (!m_.init_cond) {
            warning({}, "no init_cond; every state is initial");
            return;
        }
        if (cyclic_) return;
        require_bool(*m_.init_cond, Scope{}, "init_cond");
    }

    void check_rules(const std::vector<ProtocolRule>& rules, const Scope& sc) {
        for (const auto& r : rules) {
            if (r.guard) require_bool(*r.guard, sc, "protocol guard");
            if (r.is_nested()) {
                if (r.nested.empty()) error(r.origin.span, "empty nested choice in protocol");
                check_rules(r.nested, sc);
            }
        }
    }

    void check_protocols() {
        for (const auto& p : m_.protocols) {
            std::set<std::string> seen;
            for (const auto& prm : p.params) {
                if (!seen.insert(prm.name).second)
                    error(p.origin.span, "duplicate parameter '" + prm.name + "' in protocol \"" + p.name + "\"");
                if (!resolve_type(m_, prm.type))
                    error(p.origin.span, "unknown type '" + prm.type + "' for parameter '" + prm.name + "'");
            }
            if (p.rules.empty()) error(p.origin.span, "protocol \"" + p.name + "\" has no rules");
            Scope sc;
            sc.kind = Scope::Kind::Protocol;
            sc.protocol = &p;
            check_rules(p.rules, sc);
        }
    }

    void check_agents() {
        if (m_.agents.empty()) warning({}, "model declares no agents");
        for (const auto& a : m_.agents) {
            const auto* p = m_.find_protocol(a.protocol);
            if (!p) {
                error(a.origin.span, "agent '" + a.name + "' uses unknown protocol \"" + a.protocol + "\"");
                continue;
            }
            if (p->params.size() != a.bindings.size()) {
                error(a.origin.span, "agent '" + a.name + "' binds " + std::to_string(a.bindings.size()) +
                                         " variables but protocol \"" + p->name + "\" takes " +
                                         std::to_string(p->params.size()));
                continue;
            }
            for (std::size_t i = 0; i < a.bindings.size(); ++i) {
                const auto* v = m_.find_var(a.bindings[i]);
                if (!v) {
                    error(a.origin.span, "agent '" + a.name + "' binds undeclared variable '" + a.bindings[i] + "'");
                    continue;
                }
                auto vt = resolve_type(m_, v->type);
                auto pt = resolve_type(m_, p->params[i].type);
                if (vt && pt && !(*vt == *pt))
                    error(a.origin.span, "agent '" + a.name + "' binds '" + v->name + "' of type " + v->type +
                                             " to parameter '" + p->params[i].name + "' of type " + p->params[i].type);
            }
        }
    }

    void check_assign(const Statement& s, const Scope& sc) {
        const auto at = s.origin.span;
        auto vt = var_type(s.target);
        if (!m_.find_var(s.target)) {
            error(at, "assignment to undeclared variable '" + s.target + "'");
            type_of(s.value, sc);
            return;
        }
        auto t = type_of(s.value, sc);
        if (!vt || !t) return;
        if (vt->kind != t->type.kind || (vt->kind == ValueType::Kind::Enum && vt->type_index != t->type.type_index)) {
            error(at, "type mismatch: cannot assign " + describe(t->type) + " to '" + s.target + "' of type " +
                          describe(*vt));
            return;
        }
        if (vt->kind == ValueType::Kind::Int && t->range) {
            auto dom = *domain_interval(*vt);
            if (s.value.op == ExprOp::IntLit && (s.value.value < dom.lo || s.value.value > dom.hi)) {
                error(at, "constant " + std::to_string(s.value.value) + " outside the range of '" + s.target + "'");
            } else if (t->range->lo < dom.lo || t->range->hi > dom.hi) {
                warning(at, "assigned value may exceed IntRange of '" + s.target + "' (saturates at bounds)");
            }
        }
    }

    void check_statement(const Statement& s, const Scope& sc) {
        switch (s.kind) {
        case Statement::Kind::Skip: break;
        case Statement::Kind::Assign: check_assign(s, sc); break;
        case Statement::Kind::Seq:
            for (const auto& b : s.body) check_statement(b, sc);
            break;
        case Statement::Kind::Choice: {
            bool has_otherwise = false;
            for (const auto& br : s.branches) {
                if (br.guard)
                    require_bool(*br.guard, sc, "guard");
                else
                    has_otherwise = true;
                check_statement(br.body, sc);
            }
            if (!has_otherwise) warning(s.origin.span, "GuardedChoice without otherwise-branch (falls through as skip)");
            break;
        }
        case Statement::Kind::Nondet: {
            std::set<std::string> seen;
            for (const auto& v : s.vars) {
                if (!m_.find_var(v)) error(s.origin.span, "nondeterministic assignment to undeclared variable '" + v + "'");
                if (!seen.insert(v).second) error(s.origin.span, "variable '" + v + "' listed twice");
            }
            Scope inner = sc;
            inner.primed = &s.vars;
            require_bool(s.value, inner, "nondeterministic assignment condition");
            break;
        }
        }
    }

    void check_transitions() {
        if (!m_.transitions) {
            error({}, "model has no transitions block");
            return;
        }
        if (cyclic_) return;
        Scope sc;
        sc.allow_actions = true;
        check_statement(*m_.transitions, sc);
    }

    void check_fairness() {
        if (cyclic_) return;
        for (const auto& f : m_.fairness) require_bool(f.condition, Scope{}, "fairness condition");
    }

    void check_formula(const Formula& f, SourceSpan at) {
        switch (f.op()) {
        case LtlOp::Atom: require_bool(f.atom_expr(), Scope{}, "specification atom"); break;
        case LtlOp::True:
        case LtlOp::False: break;
        default:
            check_formula(f.lhs(), at);
            if (f.is_binary()) check_formula(f.rhs(), at);
        }
    }

    void check_specs() {
        std::set<std::string> labels;
        for (const auto& s : m_.specs) {
            if (!labels.insert(s.label).second) warning(s.origin.span, "duplicate specification label");
            if (!cyclic_) check_formula(s.body, s.origin.span);
        }
    }

    const ModelIR& m_;
    ValidationReport report_;
    std::map<std::string, std::string> names_;
    std::map<std::string, Constant> constants_;
    std::map<std::string, std::optional<Typed>> define_types_;
    std::set<std::string> in_progress_;
    bool cyclic_ = false;
};

Expr expand_rec(const Expr& e, const ModelIR& m, std::vector<std::string>& stack) {
    if (e.op == ExprOp::Ident) {
        if (const auto* d = m.find_define(e.name)) {
            if (std::find(stack.begin(), stack.end(), e.name) != stack.end())
                throw std::invalid_argument("cyclic define chain through '" + e.name + "'");
            stack.push_back(e.name);
            Expr out = expand_rec(d->body, m, stack);
            stack.pop_back();
            return out;
        }
        return e;
    }
    if (e.args.empty()) return e;
    Expr out = e;
    for (auto& a : out.args) a = expand_rec(a, m, stack);
    return out;
}

}  // namespace

ValidationReport validate_model(const ModelIR& m) {
    ValidationReport r = Validator(m).run();
    std::stable_sort(r.diagnostics.begin(), r.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.span.line, a.span.column) < std::tie(b.span.line, b.span.column);
    });
    return r;
}

Expr expand_defines(const Expr& e, const ModelIR& m) {
    std::vector<std::string> stack;
    return expand_rec(e, m, stack);
}

Formula expand_defines(const Formula& f, const ModelIR& m) {
    switch (f.op()) {
    case LtlOp::True:
    case LtlOp::False: return f;
    case LtlOp::Atom: return Formula::atom(expand_defines(f.atom_expr(), m), f.atom_id());
    default:
        if (f.is_binary()) return Formula::binary(f.op(), expand_defines(f.lhs(), m), expand_defines(f.rhs(), m));
        return Formula::unary(f.op(), expand_defines(f.lhs(), m));
    }
}

}  // namespace swapmc
