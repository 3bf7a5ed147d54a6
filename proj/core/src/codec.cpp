#include "grading/codec.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "grading/error.hpp"

namespace grading {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::geometry_mismatch: return "geometry-mismatch";
    case ErrorCode::pose_out_of_bounds: return "pose-out-of-bounds";
    case ErrorCode::out_of_bounds: return "out-of-bounds";
    case ErrorCode::unreachable_pixel: return "unreachable-pixel";
    case ErrorCode::episode_finished: return "episode-finished";
    case ErrorCode::invalid_scenario: return "invalid-scenario";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::degenerate_distribution: return "degenerate-distribution";
    case ErrorCode::no_valid_action: return "no-valid-action";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::config_mismatch: return "config-mismatch";
    case ErrorCode::non_terminal_record: return "non-terminal-record";
    case ErrorCode::unknown_policy: return "unknown-policy";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::checksum_mismatch: return "checksum-mismatch";
    case ErrorCode::protocol_error: return "protocol-error";
    case ErrorCode::bind_failure: return "bind-failure";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = ::crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t crc32(std::string_view text) noexcept {
  return crc32(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string hex32(std::uint32_t value) {
  std::array<char, 9> buf{};
  std::snprintf(buf.data(), buf.size(), "%08x", value);
  return std::string(buf.data(), 8);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::parse_error, "base64 length not a multiple of 4");
  const std::size_t pad = text.size() - std::min(text.size(), text.find_last_not_of('=') + 1);
  if (pad > 2 || (pad > 0 && pad == text.size())) throw Error(ErrorCode::parse_error, "invalid base64 padding");
  for (std::size_t i = 0; i + pad < text.size(); ++i) {
    const char ch = text[i];
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '+' && ch != '/') {
      throw Error(ErrorCode::parse_error, "invalid base64 character");
    }
  }
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::parse_error, "invalid base64 payload");
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding
  std::size_t size = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --size;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
  out.resize(size);
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw Error(ErrorCode::parse_error, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace grading
