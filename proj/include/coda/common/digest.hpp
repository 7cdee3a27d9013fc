#pragma once

#include <string>
#include <string_view>

namespace coda {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// Build-time content hash of the library sources (git-style tree digest).
std::string code_version();

}  // namespace coda
