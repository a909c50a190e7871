#include "cache_codec.hpp"

#include <vector>

#include "orca/corpus.hpp"
#include "orca/error.hpp"

namespace orca::detail {

namespace {
constexpr std::string_view kMagic = "ORCA";
}

std::string wrap_cache(std::string_view kind, const nlohmann::json& data) {
  const nlohmann::json envelope = {{"kind", kind}, {"data", data}};
  const std::vector<std::uint8_t> cbor = nlohmann::json::to_cbor(envelope);
  std::string out(kMagic);
  out.push_back(static_cast<char>(kCacheVersion));
  out.append(cbor.begin(), cbor.end());
  return out;
}

nlohmann::json unwrap_cache(std::string_view bytes, std::string_view kind) {
  if (bytes.size() < kMagic.size() + 1 || bytes.substr(0, kMagic.size()) != kMagic)
    throw StaleCacheError("not an orca cache file");
  const auto version = static_cast<unsigned char>(bytes[kMagic.size()]);
  if (version != kCacheVersion)
    throw StaleCacheError("cache version " + std::to_string(version) + ", expected " + std::to_string(kCacheVersion));
  nlohmann::json envelope;
  try {
    const auto* begin = reinterpret_cast<const std::uint8_t*>(bytes.data()) + kMagic.size() + 1;
    envelope = nlohmann::json::from_cbor(begin, begin + (bytes.size() - kMagic.size() - 1));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(kind) + " cache", std::string("corrupt CBOR: ") + e.what());
  }
  if (!envelope.is_object() || envelope.value("kind", std::string{}) != kind)
    throw StaleCacheError("cache holds '" + envelope.value("kind", std::string{"?"}) + "', expected '" +
                          std::string(kind) + "'");
  return envelope.at("data");
}

}  // namespace orca::detail
