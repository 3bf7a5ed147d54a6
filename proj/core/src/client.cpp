#include <boost/asio/connect.hpp>
#include <boost/asio/ip/address.hpp>

#include "frame_io.hpp"
#include "grading/protocol.hpp"
#include "json_io.hpp"
#include "protocol_messages.hpp"

namespace grading {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

json expect(const std::string& reply, std::string_view type) {
  const json j = parse_json(reply);
  const auto got = j.value("type", std::string());
  if (got == "ERROR") {
    throw Error(ErrorCode::protocol_error,
                "server error " + j.value("code", std::string()) + ": " + j.value("message", std::string()));
  }
  if (got != type) {
    throw Error(ErrorCode::protocol_error, "expected " + std::string(type) + " reply, got '" + got + "'");
  }
  return j;
}

}  // namespace

ProtocolClient::ProtocolClient(const std::string& host, std::uint16_t port) : socket_(io_) {
  try {
    tcp::resolver resolver(io_);
    asio::connect(socket_, resolver.resolve(host, std::to_string(port)));
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::io_failure, "cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
  }
}

ProtocolClient::~ProtocolClient() {
  boost::system::error_code ec;
  socket_.shutdown(tcp::socket::shutdown_both, ec);
  socket_.close(ec);
}

std::string ProtocolClient::exchange(std::string_view payload) {
  try {
    write_frame(socket_, payload);
    auto reply = read_frame(socket_);
    if (!reply) throw Error(ErrorCode::protocol_error, "connection closed by peer");
    return *reply;
  } catch (const boost::system::system_error& e) {
    throw Error(ErrorCode::io_failure, e.what());
  } catch (const FrameTooLarge&) {
    throw Error(ErrorCode::protocol_error, "reply frame exceeds the limit");
  }
}

std::optional<std::string> ProtocolClient::exchange_raw(std::uint32_t declared_length, std::string_view body) {
  try {
    const std::array<std::uint8_t, 4> prefix{
        static_cast<std::uint8_t>(declared_length), static_cast<std::uint8_t>(declared_length >> 8),
        static_cast<std::uint8_t>(declared_length >> 16), static_cast<std::uint8_t>(declared_length >> 24)};
    asio::write(socket_, asio::buffer(prefix));
    if (!body.empty()) asio::write(socket_, asio::buffer(body.data(), body.size()));
    return read_frame(socket_);
  } catch (const boost::system::system_error&) {
    return std::nullopt;
  } catch (const FrameTooLarge&) {
    throw Error(ErrorCode::protocol_error, "reply frame exceeds the limit");
  }
}

ResetReply ProtocolClient::reset(const ScenarioSpec& spec, std::uint64_t seed) {
  const json j = expect(exchange(json{{"type", "RESET"}, {"seed", seed}, {"scenario", to_json(spec)}}.dump()), "OBS");
  return {decode_map_b64(j.at("obs")), j.at("done").get<bool>(), j.at("failed").get<bool>()};
}

StepReply ProtocolClient::step(const WaypointAction& action, bool oracle_reference) {
  json msg{{"type", "STEP"}, {"p", to_json(action.p)}, {"s", to_json(action.s)}};
  if (oracle_reference) msg["oracle_reference"] = true;
  const json j = expect(exchange(msg.dump()), "RESULT");
  StepReply reply{result_from_json(j), std::nullopt};
  if (j.contains("oracle_reward")) reply.oracle_reward = j["oracle_reward"].get<double>();
  return reply;
}

std::pair<DiffMap, DozerPose> ProtocolClient::render() {
  const json j = expect(exchange(json{{"type", "RENDER"}}.dump()), "OBS");
  const auto& pose = j.at("pose");
  return {decode_map_b64(j.at("delta")),
          DozerPose{pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>()}};
}

void ProtocolClient::close() { expect(exchange(json{{"type", "CLOSE"}}.dump()), "RESULT"); }

ExternalPolicy::ExternalPolicy(std::string host, std::uint16_t port) : host_(std::move(host)), port_(port) {}

ExternalPolicy::~ExternalPolicy() {
  if (!client_) return;
  try {
    client_->close();
  } catch (const Error&) {
    // the policy server may already be gone
  }
}

void ExternalPolicy::begin(const GradingEnv&, const ScenarioSpec& spec, std::uint64_t seed) {
  if (!client_) client_ = std::make_unique<ProtocolClient>(host_, port_);
  seed_ = seed;
  spec_ = spec;
}

PolicyAction ExternalPolicy::act(const DiffMap& observation, const GradingEnv& env) {
  json msg{{"type", "OBS"}, {"obs", encode_map_b64(observation)}, {"step", env.step_count()}, {"seed", seed_}};
  if (env.step_count() == 0) msg["scenario"] = to_json(spec_);
  const json j = parse_json(client_->exchange(msg.dump()));
  const auto type = j.value("type", std::string());
  if (type == "CLOSE") return {std::nullopt, j.value("stuck", false)};
  if (type != "STEP") {
    throw Error(ErrorCode::protocol_error, "policy server replied '" + type + "': " + j.value("message", std::string()));
  }
  return {WaypointAction{pixel_from_json(j.at("p")), pixel_from_json(j.at("s"))}, false};
}

}  // namespace grading
