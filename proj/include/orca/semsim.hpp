#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace orca {

struct Embedding {
  std::vector<double> vector;
  std::string provider_tag;

  std::size_t dimension() const noexcept { return vector.size(); }

  bool operator==(const Embedding&) const = default;
};

/// Cosine similarity clamped to [-1, 1].
/// Throws ValidationError on dimension mismatch or a zero-norm vector.
double cosine(std::span<const double> a, std::span<const double> b);
double cosine(const Embedding& a, const Embedding& b);

/// Source of text embeddings. Implementations must tolerate concurrent calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string tag() const = 0;

  /// Order-preserving batch embedding. `ids` is either empty or parallel to `texts` and
  /// only used for error reporting.
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts,
                                             std::span<const std::string> ids = {}) = 0;

  /// Throws ValidationError for empty text.
  Embedding embed(std::string_view text, std::string_view text_id = {});
};

/// Deterministic bag-of-words embedding: lower-cased alphanumeric tokens, FNV-1a hashed
/// into `kBaselineDimension` buckets, weighted 1 + ln(count).
inline constexpr std::size_t kBaselineDimension = 1024;

/// Tokens as seen by the baseline (lower-cased, split on non-alphanumerics).
std::vector<std::string> baseline_tokens(std::string_view text);
std::size_t baseline_bucket(std::string_view token) noexcept;

/// Throws ValidationError when `text` has no tokens.
Embedding baseline_embed(std::string_view text);

class BaselineProvider final : public EmbeddingProvider {
 public:
  static constexpr std::string_view kTag = "baseline-bow-fnv1a-1024";

  std::string tag() const override { return std::string(kTag); }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts,
                                     std::span<const std::string> ids = {}) override;
};

struct ServiceOptions {
  std::string endpoint;           // "http://host:port"
  std::size_t batch_cap = 32;     // client-side cap; the service's advertised cap may lower it
  int timeout_seconds = 60;
};

/// Client for the embedding service: POST /embed {"texts": [...]} →
/// {"model", "dimension", "embeddings": [[...]], "truncated": [bool]?}.
class ServiceProvider final : public EmbeddingProvider {
 public:
  explicit ServiceProvider(ServiceOptions options);

  std::string tag() const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts,
                                     std::span<const std::string> ids = {}) override;

  /// Warnings raised by the service (e.g. truncated inputs), accumulated across calls.
  std::vector<std::string> warnings() const;

 private:
  void negotiate();

  ServiceOptions options_;
  mutable std::mutex mutex_;
  bool negotiated_ = false;
  std::string model_;
  std::size_t dimension_ = 0;
  std::size_t batch_cap_ = 0;
  std::vector<std::string> warnings_;
};

/// Memoizes another provider by text. Thread-safe.
class CachingProvider final : public EmbeddingProvider {
 public:
  explicit CachingProvider(std::shared_ptr<EmbeddingProvider> inner) : inner_(std::move(inner)) {}

  std::string tag() const override { return inner_->tag(); }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts,
                                     std::span<const std::string> ids = {}) override;

  std::size_t cached() const;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Embedding> cache_;
};

}  // namespace orca
