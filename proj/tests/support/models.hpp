#pragma once

#include <doctest.h>

#include <string>

#include "swapmc/bundled.hpp"
#include "swapmc/parser.hpp"
#include "swapmc/semantics.hpp"

namespace swapmc::testing {

inline const char* kToggle = R"(
x : Bool
init_cond = neg x
agent P "idle" (x)
transitions
begin
  x := neg x
end
spec_obs = "always x" A(G x)
spec_obs = "infinitely often x" A(G F x)
protocol "idle" (y : Bool)
begin
do
  otherwise -> <<Wait>>
od
end
)";

inline ModelIR parse_ok(const std::string& text) {
    auto r = parse_model(text);
    for (const auto& e : r.errors) MESSAGE(e.to_string());
    REQUIRE(r.ok());
    return *r.value;
}

inline Model compile_text(const std::string& text) { return Model::compile(parse_ok(text)); }

inline ModelIR example_ir(const std::string& id) { return load_model_file("examples/" + id + ".swapmc"); }
inline Model example_model(const std::string& id) { return Model::compile(example_ir(id)); }

}  // namespace swapmc::testing
