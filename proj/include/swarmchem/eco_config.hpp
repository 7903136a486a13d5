#pragma once

#include <string>

#include "json.hpp"
#include "swarmchem/eco.hpp"

namespace swarmchem::eco {

/// JSON schema (every key optional, unknown keys rejected):
///
///   {
///     "preset": "original-low" | "original-high" | "revised-low" | "revised-high",
///     "redifferentiation": 0.005,
///     "p_transmit": 0.001,
///     "p_spontaneous": 1e-05,
///     "competition": "majority_relative",
///     "collision_mode": "revised",
///     "collision_radius": 10,
///     "passive_radius": 10,
///     "majority_radius": 30,
///     "add_rate": 0.1,
///     "perturbation": {"interval": 0, "disc_radius_fraction": 0.1, "scatter_fraction": 0.1}
///   }
///
/// A preset is applied first; explicit keys override it.
EcoConfig eco_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EcoConfig& config);

}  // namespace swarmchem::eco
