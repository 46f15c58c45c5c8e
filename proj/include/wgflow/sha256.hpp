// Minimal SHA-256 (FIPS 180-4) for output manifests.
#pragma once

#include <string>

namespace wgflow {

/// Hex digest of the given bytes.
std::string sha256_hex(const std::string& bytes);

}  // namespace wgflow
