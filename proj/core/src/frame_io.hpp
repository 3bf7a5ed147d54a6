#pragma once

// Blocking frame transport over a connected TCP socket.

#include <array>
#include <optional>
#include <string>

#include <boost/asio/read.hpp>
#include <boost/asio/write.hpp>

#include "grading/protocol.hpp"

namespace grading {

struct FrameTooLarge {
  std::uint32_t length;
};

/// nullopt on orderly close by the peer; FrameTooLarge for oversize frames.
inline std::optional<std::string> read_frame(boost::asio::ip::tcp::socket& socket) {
  std::array<std::uint8_t, 4> prefix{};
  boost::system::error_code ec;
  boost::asio::read(socket, boost::asio::buffer(prefix), ec);
  if (ec == boost::asio::error::eof) return std::nullopt;
  if (ec) throw boost::system::system_error(ec);
  const std::uint32_t n = decode_frame_length(prefix);
  if (n > kMaxFrameBytes) throw FrameTooLarge{n};
  std::string body(n, '\0');
  boost::asio::read(socket, boost::asio::buffer(body));
  return body;
}

inline void write_frame(boost::asio::ip::tcp::socket& socket, std::string_view payload) {
  boost::asio::write(socket, boost::asio::buffer(encode_frame(payload)));
}

}  // namespace grading
