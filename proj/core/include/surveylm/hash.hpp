#pragma once

#include <string>
#include <string_view>

namespace surveylm {

/// Hex-encoded SHA-256 digest, the content hash behind cache keys.
std::string sha256_hex(std::string_view data);

}  // namespace surveylm
