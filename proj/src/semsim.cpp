#include "orca/semsim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "orca/error.hpp"

namespace orca {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  if (a.empty()) throw ValidationError("cosine: empty vectors");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (!std::isfinite(dot) || !std::isfinite(na) || !std::isfinite(nb))
    throw ValidationError("cosine: non-finite vector component");
  if (na == 0 || nb == 0) throw ValidationError("cosine: zero-norm vector (degenerate embedding)");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine(const Embedding& a, const Embedding& b) { return cosine(a.vector, b.vector); }

Embedding EmbeddingProvider::embed(std::string_view text, std::string_view text_id) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw ValidationError("embed: empty text" + (text_id.empty() ? std::string{} : " for " + std::string(text_id)));
  const std::string texts[] = {std::string(text)};
  const std::string ids[] = {std::string(text_id)};
  auto out = embed_batch(texts, ids);
  if (out.size() != 1) throw TransportError(std::string(text_id), "provider returned " + std::to_string(out.size()) + " embeddings for 1 text");
  return std::move(out.front());
}

// ---------------------------------------------------------------------------

std::vector<std::string> baseline_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t baseline_bucket(std::string_view token) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  static_assert((kBaselineDimension & (kBaselineDimension - 1)) == 0, "dimension must be a power of two");
  return static_cast<std::size_t>(h & (kBaselineDimension - 1));
}

Embedding baseline_embed(std::string_view text) {
  const auto tokens = baseline_tokens(text);
  if (tokens.empty()) throw ValidationError("baseline_embed: text has no alphanumeric tokens");
  std::map<std::string_view, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];
  Embedding e;
  e.provider_tag = std::string(BaselineProvider::kTag);
  e.vector.assign(kBaselineDimension, 0.0);
  // std::map iteration keeps the summation order independent of token order.
  for (const auto& [token, count] : counts) e.vector[baseline_bucket(token)] += 1.0 + std::log(static_cast<double>(count));
  return e;
}

std::vector<Embedding> BaselineProvider::embed_batch(std::span<const std::string> texts, std::span<const std::string> ids) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(baseline_embed(texts[i]));
    } catch (const ValidationError& e) {
      if (i < ids.size() && !ids[i].empty()) throw ValidationError(std::string(e.what()) + " [text " + ids[i] + "]");
      throw;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Embedding> CachingProvider::embed_batch(std::span<const std::string> texts, std::span<const std::string> ids) {
  std::vector<std::string> missing;
  std::vector<std::string> missing_ids;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (cache_.contains(texts[i])) continue;
      if (std::find(missing.begin(), missing.end(), texts[i]) != missing.end()) continue;
      missing.push_back(texts[i]);
      missing_ids.push_back(i < ids.size() ? ids[i] : std::string{});
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->embed_batch(missing, missing_ids);
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size() && i < fresh.size(); ++i) cache_.emplace(missing[i], std::move(fresh[i]));
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::lock_guard lock(mutex_);
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

std::size_t CachingProvider::cached() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace orca
