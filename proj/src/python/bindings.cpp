#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>

#include "swapmc/bundled.hpp"
#include "swapmc/checker.hpp"
#include "swapmc/parser.hpp"
#include "swapmc/simulate.hpp"
#include "swapmc/validate.hpp"

namespace py = pybind11;
using namespace swapmc;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

// A compiled model together with its reachable graph, built on first use.
struct Session {
    std::string name;
    Model model;
    std::unique_ptr<StateGraph> graph;
    GraphOptions options;

    const StateGraph& ensure_graph() {
        if (!graph) {
            py::gil_scoped_release release;
            graph = std::make_unique<StateGraph>(build_graph(model, options));
        }
        return *graph;
    }
};

std::shared_ptr<Session> make_session(const ModelIR& ir, std::string name, std::uint64_t node_budget,
                                      unsigned threads) {
    auto s = std::make_shared<Session>(Session{std::move(name), Model::compile(ir), nullptr, {}});
    s->options.node_budget = node_budget;
    s->options.threads = threads;
    return s;
}

ModelIR parse_or_throw(const std::string& text) {
    auto r = parse_model(text);
    if (!r.ok()) {
        std::string msg;
        for (const auto& e : r.errors) msg += e.to_string() + "\n";
        throw LoadError(msg);
    }
    const auto report = validate_model(*r.value);
    if (!report.ok()) throw LoadError(report.to_string());
    return *r.value;
}

py::object verdict(Session& s, const Verdict& v) { return to_python(verdict_to_json(s.model, s.name, v)); }

Formula formula_or_throw(const std::string& text) {
    auto r = parse_formula(text);
    if (!r.ok()) throw std::invalid_argument(r.errors.front().to_string());
    return *r.value;
}

}  // namespace

PYBIND11_MODULE(_swapmc, m) {
    m.doc() = "Explicit-state LTL model checking of swap protocol models";

    py::register_exception<LoadError>(m, "LoadError", PyExc_ValueError);
    py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

    py::class_<Session, std::shared_ptr<Session>>(m, "Model")
        .def_static(
            "from_file",
            [](const std::filesystem::path& path, std::uint64_t node_budget, unsigned threads) {
                return make_session(load_model_file(path), path.stem().string(), node_budget, threads);
            },
            py::arg("path"), py::arg("node_budget") = 5'000'000, py::arg("threads") = 1)
        .def_static(
            "from_source",
            [](const std::string& text, const std::string& name, std::uint64_t node_budget, unsigned threads) {
                return make_session(parse_or_throw(text), name, node_budget, threads);
            },
            py::arg("text"), py::arg("name") = "model", py::arg("node_budget") = 5'000'000, py::arg("threads") = 1)
        .def_property_readonly("name", [](const Session& s) { return s.name; })
        .def_property_readonly("specs",
                               [](const Session& s) {
                                   std::vector<std::string> out;
                                   for (const auto& sp : s.model.specs()) out.push_back(sp.label);
                                   return out;
                               })
        .def_property_readonly("variables",
                               [](const Session& s) {
                                   std::vector<std::pair<std::string, long long>> out;
                                   for (const auto& v : s.model.vars()) out.emplace_back(v.name, v.hi - v.lo + 1);
                                   return out;
                               })
        .def("initial_state_count", [](const Session& s) { return initial_states(s.model).size(); })
        .def("stats",
             [](Session& s) {
                 const StateGraph& g = s.ensure_graph();
                 py::dict d;
                 d["nodes"] = g.node_count();
                 d["edges"] = g.edge_count();
                 d["transitions"] = g.transition_count();
                 d["initial_states"] = g.initial().size();
                 return d;
             })
        .def("to_dot", [](Session& s) { return to_dot(s.model, s.ensure_graph()); })
        .def(
            "check",
            [](Session& s, const std::string& spec, std::uint64_t product_budget) {
                const StateGraph& g = s.ensure_graph();
                CheckOptions opts;
                opts.product_budget = product_budget;
                Verdict v;
                {
                    py::gil_scoped_release release;
                    v = check(s.model, g, spec, opts);
                }
                return verdict(s, v);
            },
            py::arg("spec"), py::arg("product_budget") = 20'000'000, "Check one spec by label or `#n`.")
        .def(
            "check_all",
            [](Session& s, std::uint64_t product_budget) {
                const StateGraph& g = s.ensure_graph();
                CheckOptions opts;
                opts.product_budget = product_budget;
                py::list out;
                for (std::size_t i = 0; i < s.model.specs().size(); ++i) {
                    Verdict v;
                    {
                        py::gil_scoped_release release;
                        v = check(s.model, g, i, opts);
                    }
                    out.append(verdict(s, v));
                }
                return out;
            },
            py::arg("product_budget") = 20'000'000)
        .def(
            "check_formula",
            [](Session& s, const std::string& formula, const std::string& label) {
                const Formula f = formula_or_throw(formula);
                return verdict(s, check_formula(s.model, s.ensure_graph(), f, label));
            },
            py::arg("formula"), py::arg("label") = "", "Check `A(...)` text against the model.")
        .def(
            "naive_check",
            [](Session& s, const std::string& spec, int prefix_bound, int period_bound, std::size_t node_limit) {
                const Verdict v = naive_check(s.model, s.ensure_graph(), spec, prefix_bound, period_bound, node_limit);
                py::dict d = verdict(s, v);
                d["bounded"] = v.bounded;
                return d;
            },
            py::arg("spec"), py::arg("prefix_bound") = 8, py::arg("period_bound") = 8,
            py::arg("node_limit") = kNaiveNodeLimit)
        .def(
            "simulate",
            [](Session& s, std::uint64_t seed, int steps, std::optional<std::string> start) {
                std::optional<Expr> e;
                if (start) {
                    auto r = parse_expr(*start);
                    if (!r.ok()) throw std::invalid_argument(r.errors.front().to_string());
                    e = *r.value;
                }
                py::list out;
                for (const auto& step : simulate(s.model, seed, steps, e)) {
                    nlohmann::json j = {{"state", state_to_json(s.model, step.state)}};
                    if (!step.actions.actions.empty()) j["actions"] = profile_to_json(s.model, step.actions);
                    out.append(to_python(j));
                }
                return out;
            },
            py::arg("seed") = 0, py::arg("steps") = 20, py::arg("start") = py::none());

    m.def(
        "validate",
        [](const std::string& text) {
            py::list out;
            auto r = parse_model(text);
            for (const auto& e : r.errors) {
                py::dict d;
                d["severity"] = "error";
                d["line"] = e.span.line;
                d["column"] = e.span.column;
                d["message"] = e.message;
                out.append(d);
            }
            if (!r.ok()) return out;
            for (const auto& diag : validate_model(*r.value).diagnostics) {
                py::dict d;
                d["severity"] = diag.severity == Severity::Error ? "error" : "warning";
                d["line"] = diag.span.line;
                d["column"] = diag.span.column;
                d["message"] = diag.message;
                out.append(d);
            }
            return out;
        },
        py::arg("text"), "Parse and validate model text; returns diagnostics.");

    m.def(
        "pretty_print", [](const std::string& text) { return pretty_print(parse_or_throw(text)); }, py::arg("text"));

    m.def(
        "regression_suite",
        [](const std::filesystem::path& dir) {
            SuiteReport r;
            {
                py::gil_scoped_release release;
                r = regression_suite(dir);
            }
            py::dict d;
            d["ok"] = r.ok();
            d["mismatches"] = r.mismatches;
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict x;
                x["model"] = row.model;
                x["label"] = row.label;
                x["expected"] = outcome_name(row.expected);
                x["outcome"] = outcome_name(row.verdict.outcome);
                x["trace_valid"] = row.trace_valid;
                rows.append(x);
            }
            d["rows"] = rows;
            return d;
        },
        py::arg("examples_dir"));
}
