#pragma once

// LTL over opaque boolean state atoms: negation normal form, tableau
// translation to a state-labelled generalized Buchi automaton, and exact
// evaluation on ultimately periodic words.

#include <cstdint>
#include <string>
#include <vector>

#include "swapmc/model.hpp"

namespace swapmc {

// Truth of each atom at one position, indexed by atom id.
using Valuation = std::vector<bool>;

// Assigns ids to the atoms of `f`, extending `table` with atoms not seen
// before.  Atom identity is structural equality of the expression.
Formula bind_atoms(const Formula& f, std::vector<Expr>& table);

// Negation normal form.  Implication is eliminated, negation is pushed down
// to atoms, and F/G are kept as primitives (neg F a = G neg a, neg (a U b) =
// neg a R neg b).  True/False constants are folded.
Formula normalize(const Formula& f);
bool is_nnf(const Formula& f);

// Number of X/G/F/U/R nodes.
int temporal_depth_count(const Formula& f);

struct Literal {
    int atom = -1;
    bool positive = true;
    friend bool operator==(const Literal&, const Literal&) = default;
    friend auto operator<=>(const Literal&, const Literal&) = default;
};

// State-labelled GBA.  A run q0 q1 ... reads the word w0 w1 ... when q0 is
// initial, each wi satisfies label(qi) and each q(i+1) is a successor of qi.
// It is accepting when every acceptance set is visited infinitely often.
struct Gba {
    struct Node {
        std::vector<Literal> label;             // consistent, sorted
        std::vector<std::uint32_t> successors;  // sorted
        std::vector<std::string> obligations;   // formulas the node promises, for display
    };
    std::vector<Node> nodes;
    std::vector<std::uint32_t> initial;
    std::vector<std::vector<std::uint32_t>> acceptance;  // one sorted node set per U/F subformula
    std::vector<std::string> acceptance_formulas;
    std::vector<Expr> atoms;                             // indexed by atom id

    bool label_holds(std::uint32_t node, const Valuation& v) const;
};

// Tableau construction.  `f` must have bound atoms; it is normalized first.
Gba ltl_to_gba(const Formula& f);

// Truth of `f` at position 0 of prefix . cycle^omega.  Requires a nonempty
// cycle and bound atoms.
bool eval_on_lasso(const Formula& f, const std::vector<Valuation>& prefix, const std::vector<Valuation>& cycle);

// Incremental form of eval_on_lasso.  Subformulas are numbered bottom-up;
// a Vector holds the truth of every subformula at one position.
class LassoEvaluator {
public:
    using Vector = std::vector<bool>;

    explicit LassoEvaluator(const Formula& f);

    std::size_t size() const { return subs_.size(); }

    // Truth vectors at each cycle position.
    std::vector<Vector> cycle(const std::vector<Valuation>& word) const;
    // Vector at a prefix position given the letter there and the vector at
    // the next position.
    Vector step(const Valuation& letter, const Vector& next) const;
    bool root(const Vector& v) const { return v.back(); }

private:
    struct Sub {
        LtlOp op;
        int atom = -1;
        int lhs = -1;
        int rhs = -1;
    };
    int add(const Formula& f);
    bool local(const Sub& s, const Valuation& letter, const Vector& here) const;

    std::vector<Sub> subs_;
};

// Whether the automaton accepts prefix . cycle^omega.
bool gba_accepts_lasso(const Gba& a, const std::vector<Valuation>& prefix, const std::vector<Valuation>& cycle);

std::string to_dot(const Gba& a);

}  // namespace swapmc
