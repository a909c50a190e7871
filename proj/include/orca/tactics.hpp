#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orca/corpus.hpp"
#include "orca/semsim.hpp"
#include "orca/threatmodel.hpp"

namespace orca {

using TacticSet = std::set<std::string>;

/// R sets per classifier, their union ψ, the similarities μ over ψ and the argmax ξ.
struct TacticCandidateSet {
  std::string threat_id;
  std::map<std::string, TacticSet> per_classifier;
  TacticSet merged;
  std::map<std::string, double> similarities;
  std::optional<std::string> best;
  std::vector<std::string> warnings;
};

class TacticClassifier {
 public:
  virtual ~TacticClassifier() = default;
  virtual std::string tag() const = 0;
  /// Throws on failure; an empty set is a valid answer.
  virtual TacticSet classify(const ThreatDocument& document) = 0;
};

/// Argmax with lexicographically smallest tactic id on ties; nullopt for an empty map.
std::optional<std::string> best_tactic(const std::map<std::string, double>& similarities);

/// Runs every classifier, merges their answers and scores the merged tactics against the
/// document. Failed classifiers are dropped with a warning; if all fail, throws Error.
/// The document embedding is computed with `provider` when absent.
TacticCandidateSet classify_tactics(const ThreatDocument& document,
                                    std::span<const std::shared_ptr<TacticClassifier>> classifiers,
                                    const AttackCorpus& attack, EmbeddingProvider& provider);

/// The top_k tactics by cosine(document, tactic description); ties by tactic id.
TacticSet baseline_classify(const ThreatDocument& document, const AttackCorpus& attack,
                            std::size_t top_k, EmbeddingProvider& provider);

class BaselineClassifier final : public TacticClassifier {
 public:
  BaselineClassifier(const AttackCorpus& attack, std::size_t top_k,
                     std::shared_ptr<EmbeddingProvider> provider);

  std::string tag() const override;
  TacticSet classify(const ThreatDocument& document) override;

 private:
  const AttackCorpus& attack_;
  std::size_t top_k_;
  std::shared_ptr<EmbeddingProvider> provider_;
};

/// POST /tactics {"summary": ...} → {"classifier": ..., "tactics": [...]}.
class ServiceClassifier final : public TacticClassifier {
 public:
  explicit ServiceClassifier(std::string endpoint, int timeout_seconds = 60);

  std::string tag() const override { return "service:" + endpoint_; }
  TacticSet classify(const ThreatDocument& document) override;

 private:
  std::string endpoint_;
  int timeout_seconds_;
};

}  // namespace orca
