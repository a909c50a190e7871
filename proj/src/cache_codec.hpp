#pragma once

// Cache envelope: "ORCA" magic, one version byte, then a CBOR document
// {"kind": <corpus kind>, "data": <payload>}.

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

namespace orca::detail {

std::string wrap_cache(std::string_view kind, const nlohmann::json& data);

/// Throws StaleCacheError for a foreign magic, version or kind; ParseError for bad CBOR.
nlohmann::json unwrap_cache(std::string_view bytes, std::string_view kind);

}  // namespace orca::detail
