// swapmc: check, graph, simulate, stats.
//
// Exit status: 0 when every selected spec holds (or the command succeeded),
// 1 when some spec is refuted, 2 on usage, load, validation or budget errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swapmc/bundled.hpp"
#include "swapmc/checker.hpp"
#include "swapmc/parser.hpp"
#include "swapmc/simulate.hpp"

using namespace swapmc;

namespace {

constexpr int kExitHolds = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitError = 2;

struct RunConfig {
    std::string model_path;
    std::vector<std::string> specs;
    bool all = false;
    bool json = false;
    std::string dot_path;
    std::uint64_t node_budget = 5'000'000;
    std::uint64_t product_budget = 20'000'000;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    int steps = 20;
    std::string start;
};

Model load(const RunConfig& cfg) {
    const ModelIR ir = load_model_file(cfg.model_path);
    Model m = Model::compile(ir);
    for (const auto& d : m.report().warnings())
        std::cerr << cfg.model_path << ":" << d.span.line << ":" << d.span.column << ": warning: " << d.message << "\n";
    return m;
}

StateGraph graph_of(const Model& m, const RunConfig& cfg) {
    GraphOptions go;
    go.node_budget = cfg.node_budget;
    go.threads = cfg.threads;
    return build_graph(m, go);
}

std::string model_name(const std::string& path) { return std::filesystem::path(path).stem().string(); }

void print_trace(std::ostream& os, const Model& m, const LassoTrace& t) {
    auto part = [&](const char* title, const std::vector<TraceStep>& steps, std::size_t first) {
        os << "  " << title << ":\n";
        for (std::size_t i = 0; i < steps.size(); ++i) {
            os << "    " << first + i << ": " << m.format_state(steps[i].state) << "\n";
            os << "       -> " << m.format_profile(steps[i].actions) << "\n";
        }
    };
    part("prefix", t.prefix, 0);
    part("cycle", t.cycle, t.prefix.size());
    os << "    (back to " << t.prefix.size() << ")\n";
}

int cmd_check(const RunConfig& cfg) {
    const Model m = load(cfg);
    std::vector<std::size_t> selected;
    if (cfg.all || cfg.specs.empty()) {
        for (std::size_t i = 0; i < m.specs().size(); ++i) selected.push_back(i);
    } else {
        for (const auto& s : cfg.specs) selected.push_back(find_spec(m, s));
    }
    if (!cfg.dot_path.empty() && selected.size() != 1)
        throw CLI::ValidationError("--dot", "needs exactly one selected spec");

    const StateGraph g = graph_of(m, cfg);
    CheckOptions opts;
    opts.product_budget = cfg.product_budget;

    int status = kExitHolds;
    nlohmann::json report = nlohmann::json::array();
    for (auto i : selected) {
        const Verdict v = check(m, g, i, opts);
        if (v.outcome == Outcome::Refuted) status = kExitRefuted;
        if (v.outcome == Outcome::Vacuous)
            std::cerr << "warning: spec #" << i + 1 << " holds vacuously: no fair run exists\n";
        if (cfg.json) {
            report.push_back(verdict_to_json(m, model_name(cfg.model_path), v));
            continue;
        }
        std::cout << "#" << i + 1 << " " << outcome_name(v.outcome) << "  " << normalize_whitespace(v.label) << "\n";
        std::cout << "   states " << v.stats.states << ", product states " << v.stats.product_states << ", "
                  << v.stats.millis << " ms\n";
        if (v.outcome == Outcome::Holds && v.initial_without_fair_run > 0)
            std::cout << "   " << v.initial_without_fair_run << " initial states have no fair run\n";
        if (v.trace) print_trace(std::cout, m, *v.trace);
    }
    if (cfg.json) std::cout << report.dump(2) << "\n";

    if (!cfg.dot_path.empty()) {
        std::vector<Expr> table;
        const auto& body = m.specs()[selected.front()].body;
        const Gba a = ltl_to_gba(bind_atoms(Formula::unary(LtlOp::Not, body), table));
        std::ofstream(cfg.dot_path) << to_dot(a);
    }
    return status;
}

int cmd_graph(const RunConfig& cfg) {
    const Model m = load(cfg);
    const StateGraph g = graph_of(m, cfg);
    const std::string dot = to_dot(m, g);
    if (cfg.dot_path.empty() || cfg.dot_path == "-") {
        std::cout << dot;
        std::cerr << "nodes " << g.node_count() << "\n";
    } else {
        std::ofstream out(cfg.dot_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + cfg.dot_path);
        out << dot;
        std::cout << "nodes " << g.node_count() << "\n";
    }
    return kExitHolds;
}

int cmd_simulate(const RunConfig& cfg) {
    if (cfg.steps < 1) throw CLI::ValidationError("--steps", "must be at least 1");
    const Model m = load(cfg);
    std::optional<Expr> start;
    if (!cfg.start.empty()) {
        auto r = parse_expr(cfg.start);
        if (!r.ok()) throw CLI::ValidationError("--start", r.errors.front().to_string());
        start = *r.value;
    }
    const auto run = simulate(m, cfg.seed, cfg.steps, start);
    if (cfg.json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : run) {
            nlohmann::json j = {{"state", state_to_json(m, s.state)}};
            if (!s.actions.actions.empty()) j["actions"] = profile_to_json(m, s.actions);
            arr.push_back(std::move(j));
        }
        std::cout << arr.dump(2) << "\n";
        return kExitHolds;
    }
    std::cout << "0: " << m.format_state(run.front().state) << "\n";
    for (std::size_t k = 1; k < run.size(); ++k) {
        const State& before = run[k - 1].state;
        const State& after = run[k].state;
        std::cout << k << ": " << m.format_profile(run[k - 1].actions) << " |";
        bool changed = false;
        for (std::size_t v = 0; v < m.vars().size(); ++v) {
            if (before.values[v] == after.values[v]) continue;
            std::cout << " " << m.vars()[v].name << "=" << m.format_value(static_cast<int>(v), after.values[v]);
            changed = true;
        }
        if (!changed) std::cout << " (no change)";
        std::cout << "\n";
    }
    return kExitHolds;
}

int cmd_stats(const RunConfig& cfg) {
    const Model m = load(cfg);
    const auto init = initial_states(m);
    const StateGraph g = graph_of(m, cfg);
    if (cfg.json) {
        nlohmann::json vars = nlohmann::json::array();
        for (const auto& v : m.vars()) vars.push_back({{"name", v.name}, {"domain_size", v.hi - v.lo + 1}});
        nlohmann::json j = {{"model", model_name(cfg.model_path)},
                            {"variables", vars},
                            {"initial_states", init.size()},
                            {"nodes", g.node_count()},
                            {"edges", g.edge_count()},
                            {"transitions", g.transition_count()}};
        std::cout << j.dump(2) << "\n";
        return kExitHolds;
    }
    std::cout << "variables " << m.vars().size() << "\n";
    for (const auto& v : m.vars()) std::cout << "  " << v.name << " : " << v.hi - v.lo + 1 << " values\n";
    std::cout << "initial states " << init.size() << "\n";
    std::cout << "nodes " << g.node_count() << "\n";
    std::cout << "edges " << g.edge_count() << "\n";
    std::cout << "transitions " << g.transition_count() << "\n";
    return kExitHolds;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explicit-state LTL model checker for swap protocol models"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("model", cfg.model_path, "Model file")->required();
        sub->add_option("--node-budget", cfg.node_budget, "Maximum reachable states")
            ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
        sub->add_option("--threads", cfg.threads, "Worker threads for graph construction")
            ->check(CLI::Range(1u, 256u));
    };

    auto* check_cmd = app.add_subcommand("check", "Check specifications");
    add_common(check_cmd);
    check_cmd->add_option("--spec", cfg.specs, "Spec label or #n (repeatable)");
    check_cmd->add_flag("--all", cfg.all, "Check every spec (the default)");
    check_cmd->add_flag("--json", cfg.json, "JSON report");
    check_cmd->add_option("--dot", cfg.dot_path, "Write the automaton of the negated spec");
    check_cmd->add_option("--product-budget", cfg.product_budget, "Maximum product states")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));

    auto* graph_cmd = app.add_subcommand("graph", "Export the reachable graph as DOT");
    add_common(graph_cmd);
    graph_cmd->add_option("--dot", cfg.dot_path, "Output path (stdout when absent)");

    auto* sim_cmd = app.add_subcommand("simulate", "Print a pseudorandom run");
    add_common(sim_cmd);
    sim_cmd->add_option("--seed", cfg.seed, "Random seed");
    sim_cmd->add_option("--steps", cfg.steps, "Number of steps");
    sim_cmd->add_option("--start", cfg.start, "State expression the initial state must satisfy");
    sim_cmd->add_flag("--json", cfg.json, "JSON output");

    auto* stats_cmd = app.add_subcommand("stats", "Print model and graph statistics");
    add_common(stats_cmd);
    stats_cmd->add_flag("--json", cfg.json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (*check_cmd) return cmd_check(cfg);
        if (*graph_cmd) return cmd_graph(cfg);
        if (*sim_cmd) return cmd_simulate(cfg);
        return cmd_stats(cfg);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const LoadError& e) {
        std::cerr << e.what();
    } catch (const ModelError& e) {
        std::cerr << e.what() << "\n" << e.report().to_string();
    } catch (const ResourceError& e) {
        std::cerr << "error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitError;
}
