#pragma once

// Direct recursive LTL semantics on prefix . cycle^omega.  Witness search is
// bounded by one pass over the distinct suffixes, which is exact for
// ultimately periodic words.

#include <stdexcept>
#include <vector>

#include "swapmc/ltl.hpp"

namespace swapmc::testing {

class ReferenceLasso {
public:
    ReferenceLasso(std::vector<Valuation> prefix, std::vector<Valuation> cycle)
        : prefix_(std::move(prefix)), cycle_(std::move(cycle)) {
        if (cycle_.empty()) throw std::invalid_argument("empty cycle");
    }

    bool holds(const Formula& f, std::size_t i = 0) const {
        i = canon(i);
        switch (f.op()) {
        case LtlOp::True: return true;
        case LtlOp::False: return false;
        case LtlOp::Atom: return letter(i)[f.atom_id()];
        case LtlOp::Not: return !holds(f.lhs(), i);
        case LtlOp::And: return holds(f.lhs(), i) && holds(f.rhs(), i);
        case LtlOp::Or: return holds(f.lhs(), i) || holds(f.rhs(), i);
        case LtlOp::Implies: return !holds(f.lhs(), i) || holds(f.rhs(), i);
        case LtlOp::Next: return holds(f.lhs(), i + 1);
        case LtlOp::Finally:
            for (std::size_t j = i; j < horizon(i); ++j)
                if (holds(f.lhs(), j)) return true;
            return false;
        case LtlOp::Globally:
            for (std::size_t j = i; j < horizon(i); ++j)
                if (!holds(f.lhs(), j)) return false;
            return true;
        case LtlOp::Until:
            for (std::size_t j = i; j < horizon(i); ++j) {
                if (holds(f.rhs(), j)) return true;
                if (!holds(f.lhs(), j)) return false;
            }
            return false;
        case LtlOp::Release:
            for (std::size_t j = i; j < horizon(i); ++j) {
                if (!holds(f.rhs(), j)) return false;
                if (holds(f.lhs(), j)) return true;
            }
            return true;
        }
        return false;
    }

private:
    std::size_t canon(std::size_t i) const {
        if (i < prefix_.size()) return i;
        return prefix_.size() + (i - prefix_.size()) % cycle_.size();
    }
    std::size_t horizon(std::size_t i) const { return std::max(i, prefix_.size()) + cycle_.size(); }
    const Valuation& letter(std::size_t i) const {
        return i < prefix_.size() ? prefix_[i] : cycle_[i - prefix_.size()];
    }

    std::vector<Valuation> prefix_;
    std::vector<Valuation> cycle_;
};

// Calls fn(prefix, cycle) for every lasso over `atoms` atoms with prefix
// length <= max_prefix and cycle length in [1, max_cycle].
template <class Fn>
void for_each_lasso(int atoms, int max_prefix, int max_cycle, Fn&& fn) {
    const std::size_t letters = std::size_t{1} << atoms;
    auto decode = [&](std::size_t code, int len) {
        std::vector<Valuation> w(len, Valuation(atoms));
        for (int i = 0; i < len; ++i) {
            const std::size_t l = code % letters;
            code /= letters;
            for (int a = 0; a < atoms; ++a) w[i][a] = (l >> a) & 1;
        }
        return w;
    };
    for (int p = 0; p <= max_prefix; ++p) {
        for (int c = 1; c <= max_cycle; ++c) {
            std::size_t total = 1;
            for (int k = 0; k < p + c; ++k) total *= letters;
            for (std::size_t code = 0; code < total; ++code) {
                std::size_t pc = 1;
                for (int k = 0; k < p; ++k) pc *= letters;
                fn(decode(code % pc, p), decode(code / pc, c));
            }
        }
    }
}

}  // namespace swapmc::testing
