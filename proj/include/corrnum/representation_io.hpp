#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <string>

#include "corrnum/representation.hpp"

namespace corrnum {

// Accepted documents:
//   {"label", "dimension", "rank", "generators": [[row-major reals], ...]}
//   {"type": "schottky", "la", "lb", "angle", "label"?}
//   {"type": "sym_power", "base": <label or document>, "d", "label"?}
//   {"type": "contragredient", "base": <label or document>, "label"?}
// `known` resolves base references given by label.
Representation representation_from_json(const nlohmann::json& doc,
                                        const std::map<std::string, Representation>& known = {});

// Explicit matrix form; parameters are echoed when present.
nlohmann::json representation_to_json(const Representation& rep);

}  // namespace corrnum
