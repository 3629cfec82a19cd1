#pragma once

// Fair LTL model checking on a materialized state graph: product with the
// automaton of the negated specification, generalized Buchi emptiness by SCC
// decomposition, counterexample lassos and their independent validation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swapmc/ltl.hpp"
#include "swapmc/semantics.hpp"

namespace swapmc {

struct TraceStep {
    State state;
    ActionProfile actions;  // profile taken from this state to the next step
};

struct LassoTrace {
    std::vector<TraceStep> prefix;
    std::vector<TraceStep> cycle;  // nonempty; the last step leads back to cycle[0]
};

enum class Outcome { Holds, Refuted, Vacuous };

std::string outcome_name(Outcome o);

struct CheckStats {
    std::uint64_t states = 0;
    std::uint64_t product_states = 0;
    std::uint64_t product_edges = 0;
    std::uint64_t product_model_states = 0;  // distinct graph nodes appearing in the product
    std::size_t automaton_states = 0;
    std::size_t acceptance_sets = 0;  // automaton sets plus fairness constraints
    double millis = 0;
};

struct Verdict {
    std::string label;
    Outcome outcome = Outcome::Holds;
    // Initial states from which no fair run exists.  When this covers every
    // initial state the outcome is Vacuous.
    std::size_t initial_without_fair_run = 0;
    // Set by naive_check: Holds only means no counterexample within bounds.
    bool bounded = false;
    std::optional<LassoTrace> trace;
    CheckStats stats;
};

struct CheckOptions {
    std::uint64_t product_budget = 20'000'000;
};

// Product of the reachable graph and an automaton.  A product node (s, q)
// exists when s satisfies the label of q; (s, q) -> (s', q') when s -> s' in
// the graph and q -> q' in the automaton.
struct Product {
    std::vector<std::uint32_t> model_node;
    std::vector<std::uint32_t> gba_node;
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> targets;
    std::vector<std::uint32_t> initial;
    // Per acceptance set, membership per product node: automaton sets first,
    // then one set per fairness constraint.
    std::vector<std::vector<char>> accepting;

    std::size_t node_count() const { return model_node.size(); }
};

// Truth of each automaton atom per graph node, as a bit mask.
std::vector<std::uint64_t> atom_masks(const Model& m, const StateGraph& g, const std::vector<Expr>& atoms);

Product build_product(const StateGraph& g, const Gba& a, const std::vector<std::uint64_t>& masks,
                      std::uint64_t budget = 20'000'000);

struct ProductLasso {
    std::vector<std::uint32_t> prefix;
    std::vector<std::uint32_t> cycle;
};

// A reachable lasso whose cycle lies in a nontrivial SCC and visits every
// acceptance set, or nothing.
std::optional<ProductLasso> find_fair_accepting_lasso(const Product& p);

// Attaches an action profile to every step of a node path.
LassoTrace make_trace(const Model& m, const StateGraph& g, const std::vector<std::uint32_t>& prefix,
                      const std::vector<std::uint32_t>& cycle);

// Spec index for a verbatim label (whitespace-normalized) or "#n" (1-based).
// Throws std::invalid_argument when nothing matches.
std::size_t find_spec(const Model& m, const std::string& selector);
std::string normalize_whitespace(const std::string& s);

Verdict check(const Model& m, const StateGraph& g, std::size_t spec_index, const CheckOptions& opts = {});
Verdict check(const Model& m, const StateGraph& g, const std::string& selector, const CheckOptions& opts = {});
// Checks an arbitrary formula body (defines allowed) against the model.
Verdict check_formula(const Model& m, const StateGraph& g, const Formula& body, const std::string& label,
                      const CheckOptions& opts = {});

struct TraceReport {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

// Independent check of a counterexample to `A body`: real edges, initial
// start, fairness on the cycle, and the negated body true on the lasso.
TraceReport validate_counterexample(const Model& m, const Formula& body, const LassoTrace& t);

inline constexpr std::size_t kNaiveNodeLimit = 200;

// Exhaustive search for a counterexample lasso with at most `prefix_bound`
// prefix steps and `period_bound` cycle steps.  Throws std::invalid_argument
// on graphs with more than `node_limit` nodes.
Verdict naive_check(const Model& m, const StateGraph& g, const Formula& body, int prefix_bound, int period_bound,
                    std::size_t node_limit = kNaiveNodeLimit);
Verdict naive_check(const Model& m, const StateGraph& g, const std::string& selector, int prefix_bound,
                    int period_bound, std::size_t node_limit = kNaiveNodeLimit);

nlohmann::json state_to_json(const Model& m, const State& s);
nlohmann::json profile_to_json(const Model& m, const ActionProfile& p);
nlohmann::json verdict_to_json(const Model& m, const std::string& model_name, const Verdict& v);

}  // namespace swapmc
