#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinseq {

enum class ErrorCode {
  DimensionMismatch,
  NonHermitian,
  NonUnitary,
  InvalidState,
  InvalidArgument,
  NegativeWait,
  InfeasibleTiming,
  NoMaximumFound,
  BranchAmbiguity,
  NonPeriodicFrame,
  MissingField,
  BadValue,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code and,
// where it applies, the path of the offending config field or segment label.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {})
      : std::runtime_error(message), code_(code), path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace spinseq
