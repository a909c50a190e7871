#include "orca/tactics.hpp"

#include <algorithm>

#include "orca/error.hpp"

namespace orca {

namespace {

const std::string& tactic_text(const TacticEntry& tactic) {
  return tactic.description.empty() ? tactic.name : tactic.description;
}

Embedding document_embedding(const ThreatDocument& document, EmbeddingProvider& provider) {
  if (document.embedding) return *document.embedding;
  return provider.embed(document.summary, document.threat_id);
}

}  // namespace

std::optional<std::string> best_tactic(const std::map<std::string, double>& similarities) {
  std::optional<std::string> best;
  double best_value = 0;
  // std::map iterates in lexicographic order, so strict > keeps the smallest id on ties.
  for (const auto& [id, value] : similarities) {
    if (!best || value > best_value) {
      best = id;
      best_value = value;
    }
  }
  return best;
}

TacticCandidateSet classify_tactics(const ThreatDocument& document,
                                    std::span<const std::shared_ptr<TacticClassifier>> classifiers,
                                    const AttackCorpus& attack, EmbeddingProvider& provider) {
  if (classifiers.empty()) throw ValidationError("classify_tactics: no classifiers");
  if (document.summary.empty()) throw ValidationError("classify_tactics: empty summary for " + document.threat_id);

  TacticCandidateSet out;
  out.threat_id = document.threat_id;
  for (const auto& classifier : classifiers) {
    try {
      auto tactics = classifier->classify(document);
      out.merged.insert(tactics.begin(), tactics.end());
      out.per_classifier[classifier->tag()] = std::move(tactics);
    } catch (const std::exception& e) {
      out.warnings.push_back("classifier " + classifier->tag() + " failed for " + document.threat_id + ": " + e.what());
    }
  }
  if (out.per_classifier.empty())
    throw Error("all tactic classifiers failed for " + document.threat_id);

  const Embedding doc = document_embedding(document, provider);
  for (const auto& tactic_id : out.merged) {
    const TacticEntry* tactic = attack.find_tactic(tactic_id);
    if (!tactic) {
      out.warnings.push_back(document.threat_id + ": classifier returned unknown tactic " + tactic_id);
      continue;
    }
    out.similarities[tactic_id] = cosine(doc, provider.embed(tactic_text(*tactic), tactic_id));
  }
  out.best = best_tactic(out.similarities);
  return out;
}

TacticSet baseline_classify(const ThreatDocument& document, const AttackCorpus& attack, std::size_t top_k,
                            EmbeddingProvider& provider) {
  if (top_k == 0 || top_k > attack.tactics.size())
    throw ValidationError("baseline classifier: top_k must be in [1, " + std::to_string(attack.tactics.size()) + "]");
  const Embedding doc = document_embedding(document, provider);

  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(attack.tactics.size());
  for (const auto& [id, tactic] : attack.tactics) ranked.emplace_back(cosine(doc, provider.embed(tactic_text(tactic), id)), id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  TacticSet out;
  for (std::size_t i = 0; i < top_k; ++i) out.insert(ranked[i].second);
  return out;
}

BaselineClassifier::BaselineClassifier(const AttackCorpus& attack, std::size_t top_k,
                                       std::shared_ptr<EmbeddingProvider> provider)
    : attack_(attack), top_k_(top_k), provider_(std::move(provider)) {
  if (!provider_) throw ValidationError("baseline classifier needs an embedding provider");
}

std::string BaselineClassifier::tag() const { return "baseline-top" + std::to_string(top_k_); }

TacticSet BaselineClassifier::classify(const ThreatDocument& document) {
  return baseline_classify(document, attack_, top_k_, *provider_);
}

}  // namespace orca
