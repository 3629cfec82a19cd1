#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swapmc/model.hpp"

namespace swapmc {

struct ParseError {
    SourceSpan span;
    std::string message;
    std::vector<std::string> expected;  // token classes that would have been accepted

    std::string to_string() const;
};

template <class T>
struct ParseResult {
    std::optional<T> value;
    std::vector<ParseError> errors;

    bool ok() const { return value.has_value() && errors.empty(); }
};

// Parses a whole model file.  On any error the value is empty and every error
// found (the parser resynchronises at declaration keywords) is returned.
ParseResult<ModelIR> parse_model(std::string_view text);

// Parses `A( ... )`.  The result is the body under the path quantifier; weak
// until is desugared on the way in.
ParseResult<Formula> parse_formula(std::string_view text);

// Parses a bare state expression (no temporal operators).
ParseResult<Expr> parse_expr(std::string_view text);

// Text that parses back to a structurally equal model.
std::string pretty_print(const ModelIR& m);

std::string to_string(const Expr& e);
std::string to_string(const Formula& f);  // body only, without `A(...)`
std::string to_string(const Statement& s);

}  // namespace swapmc
