#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bw {

enum class ErrorCode {
  SyntaxError,
  PortError,
  ClassificationError,
  BundleError,
  NotFound,
  StructureError,
  MatNotEmpty,
  DefError,
  ComposeError,
  UnsetSupply,
  UnplacedInstance,
  StaleRevision,
  BadRequest,
  FormatError,
  Io,
};

std::string_view to_string(ErrorCode code);

// Base for every error raised by the engine. Operations that can partially
// succeed report Diagnostics instead; exceptions are reserved for rejected
// inputs and missing entities.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected, std::string_view input);

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace bw
