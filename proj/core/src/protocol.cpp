#include "grading/protocol.hpp"

#include "grading/codec.hpp"
#include "grading/hmap_io.hpp"
#include "json_io.hpp"
#include "protocol_messages.hpp"

namespace grading {

std::vector<std::uint8_t> encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) throw Error(ErrorCode::protocol_error, "frame too large");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(n), static_cast<std::uint8_t>(n >> 8),
                                static_cast<std::uint8_t>(n >> 16), static_cast<std::uint8_t>(n >> 24)};
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::uint32_t decode_frame_length(std::span<const std::uint8_t, 4> prefix) noexcept {
  return static_cast<std::uint32_t>(prefix[0]) | static_cast<std::uint32_t>(prefix[1]) << 8 |
         static_cast<std::uint32_t>(prefix[2]) << 16 | static_cast<std::uint32_t>(prefix[3]) << 24;
}

std::string error_message(ErrorCode code, std::string_view message) {
  return json{{"type", "ERROR"}, {"code", std::string(to_string(code))}, {"message", std::string(message)}}
      .dump();
}

std::string encode_map_b64(const DiffMap& map) { return base64_encode(encode_hmap(map)); }

DiffMap decode_map_b64(const json& j) {
  return decode_hmap<DiffTag>(base64_decode(j.get<std::string>()));
}

json result_to_json(const StepResult& r) {
  return json{{"type", "RESULT"},
              {"obs", encode_map_b64(r.observation)},
              {"reward", r.reward},
              {"components", to_json(r.components)},
              {"done", r.done},
              {"failed", r.failed},
              {"info",
               {{"duration", r.info.duration},
                {"moved_volume", r.info.moved_volume},
                {"spilled_out", r.info.spilled_out},
                {"dumped_volume", r.info.dumped_volume},
                {"dumped_excess", r.info.dumped_excess},
                {"piles_dumped", r.info.piles_dumped},
                {"reason", r.info.reason}}}};
}

StepResult result_from_json(const json& j) {
  StepResult r;
  r.observation = decode_map_b64(j.at("obs"));
  r.reward = j.at("reward").get<double>();
  r.components = components_from_json(j.at("components"));
  r.done = j.at("done").get<bool>();
  r.failed = j.at("failed").get<bool>();
  const auto& info = j.at("info");
  r.info.duration = info.at("duration").get<double>();
  r.info.moved_volume = info.at("moved_volume").get<double>();
  r.info.spilled_out = info.at("spilled_out").get<double>();
  r.info.dumped_volume = info.at("dumped_volume").get<double>();
  r.info.dumped_excess = info.at("dumped_excess").get<double>();
  r.info.piles_dumped = info.at("piles_dumped").get<std::size_t>();
  r.info.reason = info.at("reason").get<std::string>();
  return r;
}

std::string Session::handle(std::string_view request, bool& close) {
  close = false;
  try {
    const json msg = parse_json(request);
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      return error_message(ErrorCode::protocol_error, "message needs a string 'type' field");
    }
    const auto type = msg["type"].get<std::string>();
    if (type == "RESET") {
      const ScenarioSpec spec = msg.contains("scenario") ? spec_from_json(msg["scenario"])
                                                         : ScenarioSpec::defaults(Family::init);
      const DiffMap obs = env_.reset(spec, msg.at("seed").get<std::uint64_t>());
      oracle_ = {};
      return json{{"type", "OBS"},
                  {"obs", encode_map_b64(obs)},
                  {"step", env_.step_count()},
                  {"done", env_.done()},
                  {"failed", env_.failed()}}
          .dump();
    }
    if (type == "STEP") {
      const WaypointAction action{pixel_from_json(msg.at("p")), pixel_from_json(msg.at("s"))};
      std::optional<double> oracle_reward;
      if (msg.value("oracle_reference", false) && env_.active() && !env_.terminated()) {
        GradingEnv shadow = env_.fork();
        const OracleDecision d = oracle_act(shadow.observation(), oracle_view(shadow), oracle_);
        oracle_reward = d.action ? shadow.step(*d.action).reward : 0.0;
      }
      json reply = result_to_json(env_.step(action));
      if (oracle_reward) reply["oracle_reward"] = *oracle_reward;
      return reply.dump();
    }
    if (type == "RENDER") {
      if (!env_.active()) return error_message(ErrorCode::episode_finished, "environment has not been reset");
      const auto& pose = env_.dozer().pose;
      return json{{"type", "OBS"},
                  {"render", true},
                  {"delta", encode_map_b64(quantize_f32(env_.delta()))},
                  {"pose", {pose.x, pose.y, pose.heading}}}
          .dump();
    }
    if (type == "CLOSE") {
      close = true;
      return json{{"type", "RESULT"}, {"closed", true}}.dump();
    }
    return error_message(ErrorCode::protocol_error, "unknown message type '" + type + "'");
  } catch (const Error& e) {
    return error_message(e.code(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_message(ErrorCode::parse_error, e.what());
  }
}

}  // namespace grading
