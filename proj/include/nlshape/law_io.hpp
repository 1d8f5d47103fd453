#pragma once

// Law specification format shared by the CLI and the tests.
//
//   {"type": "step", "k": 1}
//   {"type": "pca", "lambdas": [1, 1, 1]}
//   {"type": "ramp"}
//   {"type": "rescaled", "alpha": 1, "beta": 2, "base": {...}}
//
// Inline shorthands accepted wherever a spec is: "step:1", "pca:[1,1,1]",
// "ramp".

#include <string>
#include <string_view>

#include <json.hpp>

#include "nlshape/laws.hpp"

namespace nlshape::laws {

/// Throws std::invalid_argument on malformed specs.
InteractionLaw law_from_json(const nlohmann::json& spec);

/// GenericLaw has no serialised form and throws std::invalid_argument.
nlohmann::json law_to_json(const InteractionLaw& law);

/// Parses a JSON object or an inline shorthand.
InteractionLaw parse_law(std::string_view text);

/// Inline spec if `argument` parses as one, otherwise the path of a file
/// holding a spec.
InteractionLaw load_law(const std::string& argument);

}  // namespace nlshape::laws
