#pragma once

// Message encoders shared by the session, the client and the policy bridge.

#include "grading/env.hpp"
#include "json_io.hpp"

namespace grading {

std::string encode_map_b64(const DiffMap& map);
DiffMap decode_map_b64(const json& j);

json result_to_json(const StepResult& r);
StepResult result_from_json(const json& j);

}  // namespace grading
