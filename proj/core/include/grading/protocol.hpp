#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/asio/ip/tcp.hpp>

#include "grading/env.hpp"
#include "grading/oracle.hpp"
#include "grading/policy.hpp"

namespace grading {

/// Frames are a u32 little-endian byte length followed by that many bytes of
/// UTF-8 JSON. Every message carries "type": one of RESET, STEP, RENDER,
/// CLOSE, OBS, RESULT, ERROR.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

std::vector<std::uint8_t> encode_frame(std::string_view payload);
/// Reads the u32 length prefix from exactly four bytes.
std::uint32_t decode_frame_length(std::span<const std::uint8_t, 4> prefix) noexcept;

/// One protocol session: owns an env and answers requests.
///
///   RESET  {seed, scenario?}             -> OBS {obs, step, done, failed}
///   STEP   {p, s, oracle_reference?}     -> RESULT {obs, reward, components,
///                                           done, failed, info, oracle_reward?}
///   RENDER {}                            -> OBS {render: true, delta, pose}
///   CLOSE  {}                            -> RESULT {closed: true}
///
/// Observations are base64-encoded HMAP1 bytes. Malformed or failing requests
/// get ERROR {code, message} and leave the session usable.
class Session {
 public:
  explicit Session(Config config) : env_(std::move(config)) {}

  /// Returns the reply payload; sets `close` after a CLOSE request.
  std::string handle(std::string_view request, bool& close);

 private:
  GradingEnv env_;
  OracleState oracle_;
};

std::string error_message(ErrorCode code, std::string_view message);

/// TCP server running one thread per connection; each connection owns an
/// independent Session.
class ProtocolServer {
 public:
  ProtocolServer(Config config, const std::string& host, std::uint16_t port);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Accepts connections in the calling thread until stop().
  void run();
  /// Accepts connections on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

struct ResetReply {
  DiffMap observation;
  bool done = false;
  bool failed = false;
};

struct StepReply {
  StepResult result;
  std::optional<double> oracle_reward;
};

/// Blocking client for the protocol.
class ProtocolClient {
 public:
  ProtocolClient(const std::string& host, std::uint16_t port);
  ~ProtocolClient();
  ProtocolClient(const ProtocolClient&) = delete;
  ProtocolClient& operator=(const ProtocolClient&) = delete;

  ResetReply reset(const ScenarioSpec& spec, std::uint64_t seed);
  StepReply step(const WaypointAction& action, bool oracle_reference = false);
  /// Full-resolution difference map and dozer pose.
  std::pair<DiffMap, DozerPose> render();
  void close();

  /// Sends raw payload bytes as one frame and returns the raw reply payload.
  std::string exchange(std::string_view payload);
  /// Sends a raw length prefix followed by `body` and returns the reply, if any.
  std::optional<std::string> exchange_raw(std::uint32_t declared_length, std::string_view body);

 private:
  boost::asio::io_context io_;
  boost::asio::ip::tcp::socket socket_;
};

/// Policy that forwards decisions to a remote policy server. For every
/// decision it sends OBS {obs, step, seed} (plus the scenario at step 0) and
/// expects STEP {p, s} or CLOSE.
class ExternalPolicy final : public Policy {
 public:
  ExternalPolicy(std::string host, std::uint16_t port);
  ~ExternalPolicy() override;
  std::string name() const override { return "external"; }
  void begin(const GradingEnv& env, const ScenarioSpec& spec, std::uint64_t seed) override;
  PolicyAction act(const DiffMap& observation, const GradingEnv& env) override;

 private:
  std::string host_;
  std::uint16_t port_;
  std::uint64_t seed_ = 0;
  ScenarioSpec spec_;
  std::unique_ptr<ProtocolClient> client_;
};

/// Serves a local Policy to ExternalPolicy clients. It mirrors the episode in
/// a shadow env (reset from the step-0 scenario, then stepped with its own
/// replies) so that policies needing env access work remotely too.
class PolicyServer {
 public:
  PolicyServer(std::unique_ptr<Policy> policy, Config config, const std::string& host,
               std::uint16_t port);
  ~PolicyServer();
  std::uint16_t port() const noexcept { return port_; }
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace grading
