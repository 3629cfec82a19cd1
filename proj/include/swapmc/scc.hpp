#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace swapmc {

// Strongly connected components of a graph in CSR form.  Components are
// numbered in the order Tarjan's algorithm completes them (reverse
// topological order).
struct SccResult {
    std::vector<std::uint32_t> component;  // per node
    std::uint32_t count = 0;
};

SccResult tarjan_scc(std::span<const std::uint64_t> offsets, std::span<const std::uint32_t> targets);

// True when the component has at least one internal edge.
bool nontrivial(const SccResult& scc, std::uint32_t node, std::span<const std::uint64_t> offsets,
                std::span<const std::uint32_t> targets);

}  // namespace swapmc
