#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grading {

enum class ErrorCode {
  invalid_dimension,
  geometry_mismatch,
  pose_out_of_bounds,
  out_of_bounds,
  unreachable_pixel,
  episode_finished,
  invalid_scenario,
  invalid_spec,
  invalid_config,
  degenerate_distribution,
  no_valid_action,
  io_failure,
  parse_error,
  config_mismatch,
  non_terminal_record,
  unknown_policy,
  invalid_parameter,
  checksum_mismatch,
  protocol_error,
  bind_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All recoverable failures in the library are reported with this type; the
/// code identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace grading
