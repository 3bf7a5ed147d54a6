#include <functional>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/address.hpp>

#include "frame_io.hpp"
#include "grading/protocol.hpp"
#include "json_io.hpp"
#include "protocol_messages.hpp"

namespace grading {

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

using Handler = std::function<std::string(std::string_view, bool&)>;

// Accept loop plus one blocking thread per connection.
class FrameServer {
 public:
  FrameServer(const std::string& host, std::uint16_t port, std::function<Handler()> factory)
      : acceptor_(io_), factory_(std::move(factory)) {
    try {
      const tcp::endpoint endpoint(asio::ip::make_address(host), port);
      acceptor_.open(endpoint.protocol());
      acceptor_.set_option(tcp::acceptor::reuse_address(true));
      acceptor_.bind(endpoint);
      acceptor_.listen();
    } catch (const boost::system::system_error& e) {
      throw Error(ErrorCode::bind_failure, "cannot listen on " + host + ":" + std::to_string(port) +
                                               ": " + e.what());
    }
  }

  ~FrameServer() { stop(); }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  void run() {
    accept_next();
    io_.run();
  }

  void start() {
    thread_ = std::thread([this] { run(); });
  }

  void stop() {
    io_.stop();
    if (thread_.joinable()) thread_.join();
    std::list<Connection> done;
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
      for (auto& c : connections_) {
        boost::system::error_code ec;
        c.socket->shutdown(tcp::socket::shutdown_both, ec);
      }
      done.splice(done.end(), connections_);
    }
    for (auto& c : done) {
      if (c.thread.joinable()) c.thread.join();
    }
  }

 private:
  struct Connection {
    std::shared_ptr<tcp::socket> socket;
    std::thread thread;
  };

  void accept_next() {
    auto socket = std::make_shared<tcp::socket>(io_);
    acceptor_.async_accept(*socket, [this, socket](const boost::system::error_code& ec) {
      if (ec) return;
      std::lock_guard lock(mutex_);
      if (stopping_) return;
      connections_.push_back({socket, std::thread([this, socket] { serve(*socket); })});
      accept_next();
    });
  }

  void serve(tcp::socket& socket) {
    Handler handler = factory_();
    try {
      for (;;) {
        std::optional<std::string> request;
        try {
          request = read_frame(socket);
        } catch (const FrameTooLarge& big) {
          write_frame(socket, error_message(ErrorCode::protocol_error,
                                            "frame of " + std::to_string(big.length) + " bytes exceeds the limit"));
          break;
        }
        if (!request) break;
        bool close = false;
        write_frame(socket, handler(*request, close));
        if (close) break;
      }
    } catch (const boost::system::system_error&) {
      // peer went away
    }
    boost::system::error_code ec;
    socket.shutdown(tcp::socket::shutdown_both, ec);
  }

  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::function<Handler()> factory_;
  std::thread thread_;
  std::mutex mutex_;
  std::list<Connection> connections_;
  bool stopping_ = false;
};

// Policy side of the external-policy bridge.
class PolicyBridge {
 public:
  PolicyBridge(std::shared_ptr<Policy> policy, Config config)
      : policy_(std::move(policy)), env_(std::move(config)) {}

  std::string handle(std::string_view request, bool& close) {
    close = false;
    try {
      const json msg = parse_json(request);
      const auto type = msg.at("type").get<std::string>();
      if (type == "CLOSE") {
        close = true;
        return json{{"type", "RESULT"}, {"closed", true}}.dump();
      }
      if (type != "OBS") return error_message(ErrorCode::protocol_error, "policy server expects OBS");
      const auto step = msg.at("step").get<std::size_t>();
      if (step == 0) {
        const ScenarioSpec spec = spec_from_json(msg.at("scenario"));
        const auto seed = msg.at("seed").get<std::uint64_t>();
        env_.reset(spec, seed);
        policy_->begin(env_, spec, seed);
      } else if (last_) {
        env_.step(*last_);
      }
      const PolicyAction a = policy_->act(decode_map_b64(msg.at("obs")), env_);
      last_ = a.action;
      if (!a.action) return json{{"type", "CLOSE"}, {"stuck", a.stuck}}.dump();
      return json{{"type", "STEP"}, {"p", to_json(a.action->p)}, {"s", to_json(a.action->s)}}.dump();
    } catch (const Error& e) {
      return error_message(e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      return error_message(ErrorCode::parse_error, e.what());
    }
  }

 private:
  std::shared_ptr<Policy> policy_;
  GradingEnv env_;
  std::optional<WaypointAction> last_;
};

}  // namespace

struct ProtocolServer::Impl {
  FrameServer server;
};

ProtocolServer::ProtocolServer(Config config, const std::string& host, std::uint16_t port) {
  config.validate();
  impl_.reset(new Impl{FrameServer(host, port, [config]() -> Handler {
    auto session = std::make_shared<Session>(config);
    return [session](std::string_view request, bool& close) { return session->handle(request, close); };
  })});
  port_ = impl_->server.port();
}

ProtocolServer::~ProtocolServer() = default;
void ProtocolServer::run() { impl_->server.run(); }
void ProtocolServer::start() { impl_->server.start(); }
void ProtocolServer::stop() { impl_->server.stop(); }

struct PolicyServer::Impl {
  FrameServer server;
};

PolicyServer::PolicyServer(std::unique_ptr<Policy> policy, Config config, const std::string& host,
                           std::uint16_t port) {
  std::shared_ptr<Policy> shared(std::move(policy));
  auto mutex = std::make_shared<std::mutex>();
  impl_.reset(new Impl{FrameServer(host, port, [shared, config, mutex]() -> Handler {
    auto bridge = std::make_shared<PolicyBridge>(shared, config);
    return [bridge, mutex](std::string_view request, bool& close) {
      // the wrapped policy instance is shared by all connections
      std::lock_guard lock(*mutex);
      return bridge->handle(request, close);
    };
  })});
  port_ = impl_->server.port();
}

PolicyServer::~PolicyServer() = default;
void PolicyServer::start() { impl_->server.start(); }
void PolicyServer::stop() { impl_->server.stop(); }

}  // namespace grading
