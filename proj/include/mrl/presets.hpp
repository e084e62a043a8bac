#pragma once

#include <string>
#include <vector>

#include "mrl/objectives.hpp"

namespace mrl {

struct Preset {
    std::string name;
    WeightConfig weights;
};

// The three shipped weight configurations:
//   user-centric    — view-quality terms only
//   surface-adapt   — adds the interaction suitability term
//   situation-adapt — adds both suitability terms
const std::vector<Preset>& builtin_presets();
const WeightConfig& preset_weights(const std::string& name);

// Weight file {"weights": {term: w}, "overrides": {element: {term: w}}}.
// Unknown term names are rejected.
WeightConfig load_weights(const std::string& text);
std::string save_weights(const WeightConfig& weights);

}  // namespace mrl
