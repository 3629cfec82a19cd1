// Derives examples/htlc-reversed.expected.json from the checker, trace
// validation and naive_check agreement on a Time-shrunken variant.
//
//   swapmc-derive-reversed <examples dir> [--write]

#include <fstream>
#include <iostream>
#include <string>

#include "swapmc/bundled.hpp"

using namespace swapmc;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: swapmc-derive-reversed <examples dir> [--write]\n";
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    const bool write = argc > 2 && std::string(argv[2]) == "--write";
    try {
        const ReversedDerivation d = derive_reversed_manifest(dir);
        for (std::size_t i = 0; i < d.checked.size(); ++i)
            std::cerr << "#" << i + 1 << " " << outcome_name(d.checked[i].outcome)
                      << (d.checked[i].trace ? (d.traces_valid[i] ? " (trace valid)" : " (trace INVALID)") : "") << "\n";
        std::cerr << "variant Time 0.." << d.variant.time_hi << ", timeouts " << d.variant.timeout_a << "/"
                  << d.variant.timeout_b << ": " << d.variant_states << " states\n";
        for (std::size_t i = 0; i < d.variant_checked.size(); ++i)
            std::cerr << "  #" << i + 1 << " check " << outcome_name(d.variant_checked[i].outcome) << ", naive "
                      << outcome_name(d.variant_naive[i].outcome) << "\n";
        for (const auto& p : d.problems) std::cerr << "problem: " << p << "\n";
        if (!d.ok()) return 1;
        const std::string text = manifest_to_json(d.manifest).dump(2) + "\n";
        if (write) {
            std::ofstream(d.manifest.manifest) << text;
        } else {
            std::cout << text;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
