#include "swarmchem/eco_config.hpp"

#include <set>
#include <stdexcept>

namespace swarmchem::eco {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("bad value for '") + key + "'");
  }
}

}  // namespace

EcoConfig eco_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("eco config must be a JSON object");
  reject_unknown(j,
                 {"preset", "redifferentiation", "p_transmit", "p_spontaneous", "competition",
                  "collision_mode", "collision_radius", "passive_radius", "majority_radius",
                  "add_rate", "perturbation"},
                 "eco config");

  EcoConfig c;
  if (j.contains("preset")) c = condition_preset(j.at("preset").get<std::string>());
  read(j, "redifferentiation", c.redifferentiation);
  read(j, "p_transmit", c.p_transmit);
  read(j, "p_spontaneous", c.p_spontaneous);
  read(j, "collision_radius", c.collision_radius);
  read(j, "passive_radius", c.passive_radius);
  read(j, "majority_radius", c.majority_radius);
  read(j, "add_rate", c.add_rate);
  if (j.contains("competition")) {
    c.competition = competition_from_string(j.at("competition").get<std::string>());
  }
  if (j.contains("collision_mode")) {
    c.collision_mode = collision_mode_from_string(j.at("collision_mode").get<std::string>());
  }
  if (j.contains("perturbation")) {
    const auto& p = j.at("perturbation");
    if (!p.is_object()) throw std::invalid_argument("perturbation must be an object");
    reject_unknown(p, {"interval", "disc_radius_fraction", "scatter_fraction"}, "perturbation");
    read(p, "interval", c.perturbation.interval);
    read(p, "disc_radius_fraction", c.perturbation.disc_radius_fraction);
    read(p, "scatter_fraction", c.perturbation.scatter_fraction);
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const EcoConfig& c) {
  return {
      {"redifferentiation", c.redifferentiation},
      {"p_transmit", c.p_transmit},
      {"p_spontaneous", c.p_spontaneous},
      {"competition", std::string(to_string(c.competition))},
      {"collision_mode", std::string(to_string(c.collision_mode))},
      {"collision_radius", c.collision_radius},
      {"passive_radius", c.passive_radius},
      {"majority_radius", c.majority_radius},
      {"add_rate", c.add_rate},
      {"perturbation",
       {{"interval", c.perturbation.interval},
        {"disc_radius_fraction", c.perturbation.disc_radius_fraction},
        {"scatter_fraction", c.perturbation.scatter_fraction}}},
  };
}

}  // namespace swarmchem::eco
