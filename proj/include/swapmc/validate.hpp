#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swapmc/model.hpp"

namespace swapmc {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    SourceSpan span;
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return error_count() == 0; }
    std::size_t error_count() const;
    std::size_t warning_count() const;
    std::vector<Diagnostic> errors() const;
    std::vector<Diagnostic> warnings() const;
    std::string to_string() const;
};

// Type and scope check of a parsed model.  Never throws; everything found is
// reported with its source location.
ValidationReport validate_model(const ModelIR& m);

// Substitutes define references until none remain.  Throws
// std::invalid_argument on a cyclic define chain.
Expr expand_defines(const Expr& e, const ModelIR& m);
Formula expand_defines(const Formula& f, const ModelIR& m);

// Static type of a value as seen by the checker.
struct ValueType {
    enum class Kind { Bool, Enum, Int };
    Kind kind = Kind::Bool;
    int type_index = -1;  // into ModelIR::types; -1 for Bool and bare integers
    friend bool operator==(const ValueType&, const ValueType&) = default;
};

// Resolves a type name ("Bool" or a declared type) to a ValueType.
std::optional<ValueType> resolve_type(const ModelIR& m, const std::string& name);

// Names that may not be declared: keywords and temporal operator letters.
bool is_reserved_word(const std::string& s);

}  // namespace swapmc
