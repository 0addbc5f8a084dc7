#pragma once

#include <stdexcept>
#include <string>

namespace morphkit {

enum class ErrorCode {
  invalid_argument,
  config,
  degenerate_input,
  shape_mismatch,
  out_of_range,
  cache_miss,
  backend,
  unavailable,
  io,
};

const char* to_string(ErrorCode code);

// Every failure inside the core is reported as an Error; the C API maps the
// code onto mk_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Same code, message prefixed with a context tag ("forward step 12: ...").
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + what());
  }

 private:
  ErrorCode code_;
};

}  // namespace morphkit
