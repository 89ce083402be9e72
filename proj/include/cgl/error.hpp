#pragma once

#include <stdexcept>
#include <string>

namespace cgl {

enum class ErrorCode {
  Decode,
  DimensionMismatch,
  Channel,
  Layout,
  TooSmall,
  Format,
  NonFinite,
  SingularSystem,
  DegenerateTrace,
  NoBoundary,
  EmptyGT,
  MissingGT,
  IdMismatch,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; `code()` distinguishes the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cgl
