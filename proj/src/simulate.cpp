#include "swapmc/simulate.hpp"

#include <random>
#include <stdexcept>

namespace swapmc {

std::vector<SimStep> simulate(const Model& m, std::uint64_t seed, int steps, const std::optional<Expr>& start) {
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    std::vector<State> candidates;
    std::optional<CExpr> filter;
    if (start) filter = m.compile_expr(*start);
    for (auto& s : initial_states(m))
        if (!filter || eval(m, *filter, s)) candidates.push_back(std::move(s));
    if (candidates.empty()) throw std::invalid_argument("no initial state satisfies the start condition");

    std::mt19937_64 rng(seed);
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

    std::vector<SimStep> run;
    run.push_back({candidates[pick(candidates.size())], {}});
    for (int k = 0; k < steps; ++k) {
        auto next = successors(m, run.back().state);
        if (next.empty()) break;
        auto& t = next[pick(next.size())];
        run.back().actions = std::move(t.profile);
        run.push_back({std::move(t.target), {}});
    }
    return run;
}

}  // namespace swapmc
