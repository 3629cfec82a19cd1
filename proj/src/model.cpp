#include "swapmc/model.hpp"

#include <algorithm>
#include <cassert>

namespace swapmc {

Expr Expr::boolean(bool b, SourceSpan at) {
    Expr e;
    e.op = ExprOp::BoolLit;
    e.value = b ? 1 : 0;
    e.origin.span = at;
    return e;
}

Expr Expr::integer(std::int64_t v, SourceSpan at) {
    Expr e;
    e.op = ExprOp::IntLit;
    e.value = v;
    e.origin.span = at;
    return e;
}

Expr Expr::ident(std::string n, SourceSpan at) {
    Expr e;
    e.op = ExprOp::Ident;
    e.name = std::move(n);
    e.origin.span = at;
    return e;
}

Expr Expr::primed(std::string n, SourceSpan at) {
    Expr e;
    e.op = ExprOp::Primed;
    e.name = std::move(n);
    e.origin.span = at;
    return e;
}

Expr Expr::action(std::string agent, std::string act, SourceSpan at) {
    Expr e;
    e.op = ExprOp::Action;
    e.name = std::move(agent);
    e.member = std::move(act);
    e.origin.span = at;
    return e;
}

Expr Expr::unary(ExprOp op, Expr a, SourceSpan at) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(a));
    e.origin.span = at;
    return e;
}

Expr Expr::binary(ExprOp op, Expr a, Expr b, SourceSpan at) {
    Expr e;
    e.op = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    e.origin.span = at;
    return e;
}

const char* op_symbol(ExprOp op) {
    switch (op) {
    case ExprOp::Not: return "neg";
    case ExprOp::And: return "/\\";
    case ExprOp::Or: return "\\/";
    case ExprOp::Implies: return "=>";
    case ExprOp::Eq: return "==";
    case ExprOp::Neq: return "/=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    default: return "";
    }
}

Statement Statement::skip(SourceSpan at) {
    Statement s;
    s.origin.span = at;
    return s;
}

Statement Statement::assign(std::string var, Expr e, SourceSpan at) {
    Statement s;
    s.kind = Kind::Assign;
    s.target = std::move(var);
    s.value = std::move(e);
    s.origin.span = at;
    return s;
}

Statement Statement::seq(std::vector<Statement> body, SourceSpan at) {
    Statement s;
    s.kind = Kind::Seq;
    s.body = std::move(body);
    s.origin.span = at;
    return s;
}

Statement Statement::nondet(std::vector<std::string> vars, Expr rel, SourceSpan at) {
    Statement s;
    s.kind = Kind::Nondet;
    s.vars = std::move(vars);
    s.value = std::move(rel);
    s.origin.span = at;
    return s;
}

Statement Statement::choice(std::vector<GuardedBranch> branches, SourceSpan at) {
    Statement s;
    s.kind = Kind::Choice;
    s.branches = std::move(branches);
    s.origin.span = at;
    return s;
}

bool operator==(const Statement& a, const Statement& b) {
    return a.kind == b.kind && a.target == b.target && a.value == b.value && a.branches == b.branches &&
           a.body == b.body && a.vars == b.vars;
}

// ---------------------------------------------------------------------------

namespace {
const FormulaNode& default_node() {
    static const FormulaNode n;
    return n;
}
}  // namespace

Formula::Formula() = default;

const FormulaNode& Formula::node() const { return node_ ? *node_ : default_node(); }

Formula Formula::truth(bool b) {
    auto n = std::make_shared<FormulaNode>();
    n->op = b ? LtlOp::True : LtlOp::False;
    return Formula(std::move(n));
}

Formula Formula::atom(Expr e, int id) {
    auto n = std::make_shared<FormulaNode>();
    n->op = LtlOp::Atom;
    n->atom = std::move(e);
    n->atom_id = id;
    return Formula(std::move(n));
}

Formula Formula::unary(LtlOp op, Formula a) {
    auto n = std::make_shared<FormulaNode>();
    n->op = op;
    n->lhs = std::move(a);
    return Formula(std::move(n));
}

Formula Formula::binary(LtlOp op, Formula a, Formula b) {
    auto n = std::make_shared<FormulaNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return Formula(std::move(n));
}

LtlOp Formula::op() const { return node().op; }
const Expr& Formula::atom_expr() const { return node().atom; }
int Formula::atom_id() const { return node().atom_id; }
const Formula& Formula::lhs() const { return node().lhs; }
const Formula& Formula::rhs() const { return node().rhs; }

bool Formula::is_binary() const {
    switch (op()) {
    case LtlOp::And:
    case LtlOp::Or:
    case LtlOp::Implies:
    case LtlOp::Until:
    case LtlOp::Release: return true;
    default: return false;
    }
}

bool Formula::is_unary() const {
    switch (op()) {
    case LtlOp::Not:
    case LtlOp::Next:
    case LtlOp::Globally:
    case LtlOp::Finally: return true;
    default: return false;
    }
}

bool Formula::is_temporal() const {
    switch (op()) {
    case LtlOp::Next:
    case LtlOp::Globally:
    case LtlOp::Finally:
    case LtlOp::Until:
    case LtlOp::Release: return true;
    default: return false;
    }
}

bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    if (a.op() == LtlOp::Atom) return a.atom_expr() == b.atom_expr() && a.atom_id() == b.atom_id();
    if (a.is_unary()) return a.lhs() == b.lhs();
    if (a.is_binary()) return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    return true;
}

// ---------------------------------------------------------------------------

namespace {
template <class T>
const T* find_named(const std::vector<T>& v, const std::string& name) {
    auto it = std::find_if(v.begin(), v.end(), [&](const T& d) { return d.name == name; });
    return it == v.end() ? nullptr : &*it;
}

void collect_actions(const std::vector<ProtocolRule>& rules, std::vector<std::string>& out) {
    for (const auto& r : rules) {
        if (r.is_nested()) {
            collect_actions(r.nested, out);
        } else if (std::find(out.begin(), out.end(), r.action) == out.end()) {
            out.push_back(r.action);
        }
    }
}
}  // namespace

const TypeDecl* ModelIR::find_type(const std::string& name) const {
    auto it = std::find_if(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name() == name; });
    return it == types.end() ? nullptr : &*it;
}
const VarDecl* ModelIR::find_var(const std::string& name) const { return find_named(vars, name); }
const DefineDecl* ModelIR::find_define(const std::string& name) const { return find_named(defines, name); }
const AgentDecl* ModelIR::find_agent(const std::string& name) const { return find_named(agents, name); }
const ProtocolDecl* ModelIR::find_protocol(const std::string& name) const { return find_named(protocols, name); }

std::vector<std::string> protocol_actions(const ProtocolDecl& p) {
    std::vector<std::string> out;
    collect_actions(p.rules, out);
    return out;
}

}  // namespace swapmc
