#pragma once

// Internal JSON mappings shared by the scenario, episode and protocol code.

#include <json.hpp>

#include "grading/env.hpp"
#include "grading/scenario.hpp"

namespace grading {

using json = nlohmann::ordered_json;

json to_json(const GaussianPile& pile);
GaussianPile pile_from_json(const json& j);

json to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const json& j);

json to_json(const RewardComponents& c);
RewardComponents components_from_json(const json& j);

json to_json(const Pixel& p);
Pixel pixel_from_json(const json& j);

/// Parses text, mapping any library error to ErrorCode::parse_error.
json parse_json(std::string_view text);

}  // namespace grading
