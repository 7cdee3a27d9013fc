#pragma once

#include <stdexcept>
#include <string>

namespace coda {

// Base class for all contract/domain failures raised by the library. The
// `code` is a stable machine-readable identifier used in CLI error lines and
// HTTP error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace coda
