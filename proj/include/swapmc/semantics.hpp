#pragma once

// Executable semantics: a validated model compiled to index-based form, state
// enumeration, protocol evaluation, transition execution and reachable-graph
// construction.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swapmc/model.hpp"
#include "swapmc/validate.hpp"

namespace swapmc {

using Value = std::int32_t;

// Total assignment, one value per declared variable in declaration order.
// Enum values are constant indices, booleans 0/1, integers themselves.
struct State {
    std::vector<Value> values;

    friend bool operator==(const State&, const State&) = default;
    friend auto operator<=>(const State&, const State&) = default;
};

struct StateHash {
    std::size_t operator()(const State& s) const noexcept;
};

// One chosen action index per agent (indices into Model::agents()[i].actions).
struct ActionProfile {
    std::vector<std::uint16_t> actions;

    friend bool operator==(const ActionProfile&, const ActionProfile&) = default;
    friend auto operator<=>(const ActionProfile&, const ActionProfile&) = default;
};

struct Transition {
    ActionProfile profile;
    State target;

    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
};

class ModelError : public std::runtime_error {
public:
    explicit ModelError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

// Raised when exploration exceeds a configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised in strict arithmetic mode when a value leaves its domain.
class RangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Compiled expressions

enum class COp : std::uint8_t {
    Const,
    Var,
    Primed,
    Action,
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

struct CExpr {
    COp op = COp::Const;
    Value imm = 0;         // Const value; Action: action index
    int index = -1;        // Var/Primed: variable; Action: agent
    bool clamp = false;    // Add/Sub saturate into [lo, hi]
    Value lo = 0;
    Value hi = 0;
    std::vector<CExpr> kids;
};

struct CStmt {
    enum class Kind : std::uint8_t { Skip, Assign, Choice, Seq, Nondet };
    Kind kind = Kind::Skip;
    int target = -1;
    CExpr value;
    std::vector<std::pair<std::optional<CExpr>, CStmt>> branches;
    std::vector<CStmt> body;
    std::vector<int> vars;
};

struct CRule {
    std::optional<CExpr> guard;
    int action = -1;  // -1 for a nested choice
    std::vector<CRule> nested;
};

struct VarInfo {
    std::string name;
    ValueType type;
    Value lo = 0;  // domain bounds (0..n-1 for enums, 0..1 for Bool)
    Value hi = 0;
    std::vector<std::string> constants;  // enum constants
};

struct AgentInfo {
    std::string name;
    std::vector<std::string> actions;  // protocol actions plus the implicit Skip
    std::vector<CRule> rules;          // guards over environment variables
    int skip_action = -1;
};

struct EvalOptions {
    bool strict_arithmetic = false;  // throw RangeError instead of saturating
};

// Validated, immutable, index-resolved model.
class Model {
public:
    // Validates and compiles.  Throws ModelError when validation reports errors.
    static Model compile(const ModelIR& ir, EvalOptions opts = {});

    const ModelIR& ir() const { return ir_; }
    const ValidationReport& report() const { return report_; }
    const EvalOptions& options() const { return opts_; }

    const std::vector<VarInfo>& vars() const { return vars_; }
    const std::vector<AgentInfo>& agents() const { return agents_; }
    const std::vector<CExpr>& init_conjuncts() const { return init_conjuncts_; }
    const CStmt& transitions() const { return transitions_; }
    const std::vector<CExpr>& fairness() const { return fairness_; }

    // Specification bodies with defines expanded.
    const std::vector<SpecDecl>& specs() const { return specs_; }

    int var_index(const std::string& name) const;
    int agent_index(const std::string& name) const;
    int action_index(int agent, const std::string& action) const;

    // Compiles a state expression (defines expanded).  Action propositions
    // and primed references are accepted; the caller supplies context.
    CExpr compile_expr(const Expr& e) const;
    CStmt compile_statement(const Statement& s) const;

    std::string format_value(int var, Value v) const;
    std::string format_state(const State& s) const;
    std::string format_profile(const ActionProfile& p) const;

    bool in_domain(const State& s) const;

private:
    Model() = default;

    ModelIR ir_;
    ValidationReport report_;
    EvalOptions opts_;
    std::vector<VarInfo> vars_;
    std::vector<AgentInfo> agents_;
    std::vector<CExpr> init_conjuncts_;
    CStmt transitions_;
    std::vector<CExpr> fairness_;
    std::vector<SpecDecl> specs_;
};

// ---------------------------------------------------------------------------
// Operations

// Evaluates an IR expression.  `profile` is needed for action propositions,
// `primed` for primed references.
Value eval_expr(const Model& m, const Expr& e, const State& s, const ActionProfile* profile = nullptr,
                const State* primed = nullptr);
Value eval(const Model& m, const CExpr& e, const State& s);

std::vector<State> initial_states(const Model& m);

// Sorted action indices the agent may choose in `s`.
std::vector<int> enabled_actions(const Model& m, int agent, const State& s);
std::vector<std::string> enabled_action_names(const Model& m, const std::string& agent, const State& s);

std::vector<State> exec_statement(const Model& m, const Statement& stmt, const State& s, const ActionProfile& profile);
std::vector<State> exec_statement(const Model& m, const CStmt& stmt, const State& s, const ActionProfile& profile);

// All (profile, successor) pairs, sorted and duplicate free.
std::vector<Transition> successors(const Model& m, const State& s);

// Successors grouped by the agents the transition block actually consulted.
// `profile` entries for agents that were never read are kAnyAction; the
// targets apply to every enabled choice of those agents.
inline constexpr std::uint16_t kAnyAction = 0xffff;
struct PartialTransitions {
    ActionProfile profile;
    std::vector<State> targets;  // sorted, unique
};
std::vector<PartialTransitions> partial_successors(const Model& m, const State& s);

// ---------------------------------------------------------------------------
// Reachable graph

struct GraphOptions {
    std::uint64_t node_budget = 5'000'000;
    unsigned threads = 1;
    // Extra boolean state expressions to evaluate and cache per node.  Spec
    // atoms of the model are always cached.
    std::vector<Expr> extra_atoms;
};

class StateGraph {
public:
    std::size_t node_count() const { return initial_flags_.size(); }
    std::size_t width() const { return width_; }
    std::uint64_t transition_count() const { return transition_count_; }  // (s, profile, s') triples
    std::uint64_t edge_count() const { return targets_.size(); }           // distinct (s, s') pairs

    State state(std::uint32_t node) const;
    std::span<const Value> values(std::uint32_t node) const {
        return {values_.data() + static_cast<std::size_t>(node) * width_, width_};
    }
    std::span<const std::uint32_t> successors(std::uint32_t node) const {
        return {targets_.data() + offsets_[node], targets_.data() + offsets_[node + 1]};
    }
    std::span<const std::uint64_t> offsets() const { return offsets_; }
    std::span<const std::uint32_t> targets() const { return targets_; }
    const std::vector<std::uint32_t>& initial() const { return initial_; }
    bool is_initial(std::uint32_t node) const { return initial_flags_[node] != 0; }

    // Node id of a state, or -1.
    std::int64_t find(const State& s) const;

    // Fairness truth per constraint and node.
    bool fair(std::size_t constraint, std::uint32_t node) const { return fairness_[constraint][node] != 0; }
    std::size_t fairness_count() const { return fairness_.size(); }

    // Cached atom truth; returns -1 when the expression was not cached.
    int atom_slot(const Expr& expanded_atom) const;
    bool atom(int slot, std::uint32_t node) const { return atom_truth_[slot][node] != 0; }
    const std::vector<Expr>& atom_exprs() const { return atom_exprs_; }

private:
    friend StateGraph build_graph(const Model&, const GraphOptions&);

    std::uint32_t lookup_or_insert(std::span<const Value> v, bool& inserted);
    void grow_index();

    std::size_t width_ = 0;
    std::vector<Value> values_;
    std::vector<std::uint32_t> initial_;
    std::vector<char> initial_flags_;
    std::vector<std::uint64_t> offsets_;
    std::vector<std::uint32_t> targets_;
    std::uint64_t transition_count_ = 0;
    std::vector<std::vector<char>> fairness_;
    std::vector<Expr> atom_exprs_;
    std::vector<std::vector<char>> atom_truth_;
    std::vector<std::uint32_t> slots_;  // open addressing, node id + 1
};

// Breadth-first closure of successors from the initial states.  Node numbers
// depend only on the model: initial states in canonical order, then each
// node's new successors in canonical order.  Throws ResourceError when the
// node budget is exceeded and std::invalid_argument when there is no initial
// state.
StateGraph build_graph(const Model& m, const GraphOptions& opts = {});

// Full (profile, target) edges of one node, recomputed from the model.
std::vector<std::pair<ActionProfile, std::uint32_t>> edges_from(const Model& m, const StateGraph& g,
                                                                std::uint32_t node);

// DOT rendering.  One edge per (source, consulted-actions profile, target);
// `*` marks an agent whose choice the transition did not depend on.
std::string to_dot(const Model& m, const StateGraph& g);

}  // namespace swapmc
