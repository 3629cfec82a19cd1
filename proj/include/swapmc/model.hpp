#pragma once

// Model intermediate representation shared by every stage of the checker.
//
// The IR is produced by the parser (names only, nothing resolved) and is
// consumed by validation, compilation and pretty printing.  Equality is
// structural; source locations never take part in it.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swapmc {

struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 0;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

// Where an IR node came from.  Always compares equal so that defaulted
// equality on IR structs stays structural.
struct Origin {
    SourceSpan span;
    friend bool operator==(const Origin&, const Origin&) { return true; }
};

// ---------------------------------------------------------------------------
// Domains

struct EnumDomain {
    std::string name;
    std::vector<std::string> constants;
    friend bool operator==(const EnumDomain&, const EnumDomain&) = default;
};

struct IntRange {
    std::string name;
    std::int32_t lo = 0;
    std::int32_t hi = 0;
    friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct TypeDecl {
    enum class Kind { Enum, Range };
    Kind kind = Kind::Enum;
    EnumDomain enumeration;
    IntRange range;
    Origin origin;

    const std::string& name() const { return kind == Kind::Enum ? enumeration.name : range.name; }
    friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

inline constexpr const char* kBoolType = "Bool";

// ---------------------------------------------------------------------------
// Expressions

enum class ExprOp {
    BoolLit,   // value 0/1
    IntLit,    // value
    Ident,     // variable, define or constant reference: name
    Primed,    // x' : name
    Action,    // Agent.Action : name, member
    Not,
    And,
    Or,
    Implies,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
};

struct Expr {
    ExprOp op = ExprOp::BoolLit;
    std::int64_t value = 0;
    std::string name;
    std::string member;
    std::vector<Expr> args;
    Origin origin;

    static Expr boolean(bool b, SourceSpan at = {});
    static Expr integer(std::int64_t v, SourceSpan at = {});
    static Expr ident(std::string n, SourceSpan at = {});
    static Expr primed(std::string n, SourceSpan at = {});
    static Expr action(std::string agent, std::string act, SourceSpan at = {});
    static Expr unary(ExprOp op, Expr a, SourceSpan at = {});
    static Expr binary(ExprOp op, Expr a, Expr b, SourceSpan at = {});

    bool is_comparison() const { return op >= ExprOp::Eq && op <= ExprOp::Ge; }
    bool is_connective() const { return op >= ExprOp::Not && op <= ExprOp::Implies; }
    bool is_arithmetic() const { return op == ExprOp::Add || op == ExprOp::Sub; }

    friend bool operator==(const Expr&, const Expr&) = default;
};

const char* op_symbol(ExprOp op);

// ---------------------------------------------------------------------------
// Statements

struct Statement;

struct GuardedBranch;

struct Statement {
    enum class Kind { Skip, Assign, Choice, Seq, Nondet };
    Kind kind = Kind::Skip;
    std::string target;                 // Assign
    Expr value;                         // Assign value, Nondet relation
    std::vector<GuardedBranch> branches;  // Choice
    std::vector<Statement> body;        // Seq
    std::vector<std::string> vars;      // Nondet
    Origin origin;

    static Statement skip(SourceSpan at = {});
    static Statement assign(std::string var, Expr e, SourceSpan at = {});
    static Statement seq(std::vector<Statement> body, SourceSpan at = {});
    static Statement nondet(std::vector<std::string> vars, Expr rel, SourceSpan at = {});
    static Statement choice(std::vector<GuardedBranch> branches, SourceSpan at = {});

    friend bool operator==(const Statement&, const Statement&);
};

// A guard of nullopt is the `otherwise` marker.
struct GuardedBranch {
    std::optional<Expr> guard;
    Statement body;
    friend bool operator==(const GuardedBranch&, const GuardedBranch&) = default;
};

// ---------------------------------------------------------------------------
// Protocols and agents

// A protocol rule either names an action (`-> <<a>>`) or opens a nested
// `if ... fi` of further rules.
struct ProtocolRule {
    std::optional<Expr> guard;
    std::string action;
    std::vector<ProtocolRule> nested;
    Origin origin;

    bool is_nested() const { return action.empty(); }
    friend bool operator==(const ProtocolRule&, const ProtocolRule&) = default;
};

struct Param {
    std::string name;
    std::string type;
    friend bool operator==(const Param&, const Param&) = default;
};

struct ProtocolDecl {
    std::string name;
    std::vector<Param> params;
    std::vector<ProtocolRule> rules;
    Origin origin;
    friend bool operator==(const ProtocolDecl&, const ProtocolDecl&) = default;
};

struct AgentDecl {
    std::string name;
    std::string protocol;
    std::vector<std::string> bindings;
    Origin origin;
    friend bool operator==(const AgentDecl&, const AgentDecl&) = default;
};

// ---------------------------------------------------------------------------
// Temporal formulas

enum class LtlOp { True, False, Atom, Not, And, Or, Implies, Next, Globally, Finally, Until, Release };

struct FormulaNode;

// Immutable LTL tree with value-style (deep) equality.
class Formula {
public:
    Formula();
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

    static Formula truth(bool b);
    static Formula atom(Expr e, int id = -1);
    static Formula unary(LtlOp op, Formula a);
    static Formula binary(LtlOp op, Formula a, Formula b);

    LtlOp op() const;
    const Expr& atom_expr() const;
    int atom_id() const;
    const Formula& lhs() const;
    const Formula& rhs() const;
    const FormulaNode& node() const;

    bool is_binary() const;
    bool is_unary() const;
    bool is_temporal() const;

    friend bool operator==(const Formula& a, const Formula& b);

private:
    std::shared_ptr<const FormulaNode> node_;  // null reads as True
};

struct FormulaNode {
    LtlOp op = LtlOp::True;
    Expr atom;
    int atom_id = -1;
    Formula lhs;
    Formula rhs;
};

struct SpecDecl {
    std::string label;
    Formula body;  // the formula under the top-level A
    Origin origin;
    friend bool operator==(const SpecDecl&, const SpecDecl&) = default;
};

struct DefineDecl {
    std::string name;
    Expr body;
    Origin origin;
    friend bool operator==(const DefineDecl&, const DefineDecl&) = default;
};

struct VarDecl {
    std::string name;
    std::string type;
    Origin origin;
    friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

struct FairnessDecl {
    Expr condition;
    Origin origin;
    friend bool operator==(const FairnessDecl&, const FairnessDecl&) = default;
};

struct ModelIR {
    std::vector<TypeDecl> types;
    std::vector<VarDecl> vars;
    std::vector<DefineDecl> defines;
    std::optional<Expr> init_cond;
    std::vector<AgentDecl> agents;
    std::vector<ProtocolDecl> protocols;
    std::optional<Statement> transitions;
    std::vector<FairnessDecl> fairness;
    std::vector<SpecDecl> specs;

    const TypeDecl* find_type(const std::string& name) const;
    const VarDecl* find_var(const std::string& name) const;
    const DefineDecl* find_define(const std::string& name) const;
    const AgentDecl* find_agent(const std::string& name) const;
    const ProtocolDecl* find_protocol(const std::string& name) const;

    friend bool operator==(const ModelIR&, const ModelIR&) = default;
};

// Collects every action named anywhere in a protocol's rules, in first
// occurrence order.  The implicit "Skip" action is not included.
std::vector<std::string> protocol_actions(const ProtocolDecl& p);

inline constexpr const char* kSkipAction = "Skip";

}  // namespace swapmc
