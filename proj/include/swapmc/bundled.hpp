#pragma once

// The bundled swap models, their expected-verdict manifests and the
// reversed-timeout HTLC experiment.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swapmc/checker.hpp"
#include "swapmc/model.hpp"

namespace swapmc {

// Parse or validation failure while loading a model file.  what() carries
// every diagnostic, one per line, prefixed with the path.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
ModelIR load_model_file(const std::filesystem::path& path);

struct ExpectedVerdict {
    std::string label;
    Outcome outcome = Outcome::Holds;
};

struct BundledModel {
    std::string id;  // escrow, htlc, htlc-reversed
    std::filesystem::path source;
    std::filesystem::path manifest;
    std::vector<ExpectedVerdict> expected;
};

inline constexpr const char* kBundledIds[] = {"escrow", "htlc", "htlc-reversed"};

// Reads `<dir>/<id>.swapmc` and `<dir>/<id>.expected.json`.
BundledModel load_bundled(const std::filesystem::path& dir, const std::string& id);
std::vector<BundledModel> bundled_models(const std::filesystem::path& dir);

nlohmann::ordered_json manifest_to_json(const BundledModel& b);

// Replaces the integer constant in every `var == k` conjunct of init_cond.
// Throws std::invalid_argument when the variable is never pinned that way.
ModelIR set_init_constant(const ModelIR& ir, const std::string& var, std::int64_t value);
std::int64_t init_constant(const ModelIR& ir, const std::string& var);

// HTLC with the two timeout constants exchanged.
ModelIR make_htlc_reversed(const ModelIR& htlc);

// HTLC with the Time range cut to 0..hi and the given timeouts.
ModelIR shrink_time(const ModelIR& htlc, int hi, int timeout_a, int timeout_b);

struct SuiteRow {
    std::string model;
    std::string label;
    Outcome expected = Outcome::Holds;
    Verdict verdict;
    bool trace_valid = true;  // refutations only
};

struct SuiteReport {
    std::vector<SuiteRow> rows;
    std::vector<std::string> mismatches;
    bool ok() const { return mismatches.empty(); }
};

// Checks every (model, spec) pair against the manifests.  Mismatched
// outcomes, unvalidated traces and manifest labels missing from the model
// are all reported as mismatches.
SuiteReport regression_suite(const std::filesystem::path& dir, unsigned threads = 1);

// Time-shrunken variant used to cross-check the reversed experiment with the
// naive oracle.
struct ShrunkVariant {
    int time_hi = 6;
    int timeout_a = 4;
    int timeout_b = 6;
};

struct ReversedDerivation {
    BundledModel manifest;  // derived expected verdicts for htlc-reversed
    std::vector<Verdict> checked;
    std::vector<bool> traces_valid;
    ShrunkVariant variant;
    std::size_t variant_states = 0;
    std::vector<std::uint64_t> variant_product_model_states;
    std::vector<Verdict> variant_checked;
    std::vector<Verdict> variant_naive;
    std::vector<std::string> problems;
    bool ok() const { return problems.empty(); }
};

// Derives the htlc-reversed manifest: check every spec of the reversed model,
// validate every refutation, and require check and naive_check (bounds 8/8)
// to agree on the shrunken variant.
ReversedDerivation derive_reversed_manifest(const std::filesystem::path& dir, const ShrunkVariant& variant = {},
                                            unsigned threads = 1);

}  // namespace swapmc
