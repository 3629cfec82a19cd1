#include "swapmc/scc.hpp"

#include <algorithm>
#include <limits>

namespace swapmc {

SccResult tarjan_scc(std::span<const std::uint64_t> offsets, std::span<const std::uint32_t> targets) {
    const std::size_t n = offsets.empty() ? 0 : offsets.size() - 1;
    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

    SccResult r;
    r.component.assign(n, kUnvisited);
    std::vector<std::uint32_t> index(n, kUnvisited);
    std::vector<std::uint32_t> low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<std::uint32_t> stack;
    struct Frame {
        std::uint32_t node;
        std::uint64_t edge;
    };
    std::vector<Frame> calls;
    std::uint32_t counter = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        calls.push_back({static_cast<std::uint32_t>(root), offsets[root]});
        index[root] = low[root] = counter++;
        stack.push_back(static_cast<std::uint32_t>(root));
        on_stack[root] = 1;
        while (!calls.empty()) {
            Frame& f = calls.back();
            const std::uint32_t v = f.node;
            if (f.edge < offsets[v + 1]) {
                const std::uint32_t w = targets[f.edge++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    calls.push_back({w, offsets[w]});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    r.component[w] = r.count;
                } while (w != v);
                ++r.count;
            }
            calls.pop_back();
            if (!calls.empty()) {
                const std::uint32_t parent = calls.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    return r;
}

bool nontrivial(const SccResult& scc, std::uint32_t node, std::span<const std::uint64_t> offsets,
                std::span<const std::uint32_t> targets) {
    for (std::uint64_t e = offsets[node]; e < offsets[node + 1]; ++e)
        if (scc.component[targets[e]] == scc.component[node]) return true;
    return false;
}

}  // namespace swapmc
