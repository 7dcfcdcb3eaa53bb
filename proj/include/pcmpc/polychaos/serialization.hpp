#pragma once

#include "json.hpp"

#include "pcmpc/polychaos/expansion.hpp"

namespace pcmpc::polychaos {

/// {"families": [...], "maps": [{"a":..,"b":..}], "order": P}
nlohmann::json basis_to_json(const OrthoBasis& basis);
BasisPtr basis_from_json(const nlohmann::json& j);

/// {"basis": {...}, "order": P, "coeffs": [...]}
nlohmann::json expansion_to_json(const PCExpansion& e);
PCExpansion expansion_from_json(const nlohmann::json& j);

}  // namespace pcmpc::polychaos
