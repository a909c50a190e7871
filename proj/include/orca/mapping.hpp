#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orca/corpus.hpp"
#include "orca/error.hpp"
#include "orca/semsim.hpp"
#include "orca/tactics.hpp"
#include "orca/threatmodel.hpp"

namespace orca {

enum class Branch { TTM, TCM };
enum class FilterCriterion { HFC, SFC };
enum class AdmittedBy { threshold, soft_fallback };
/// Which tactics select the TTM technique pool: the merged set ψ or the single best ξ.
enum class Preselect { psi, xi };

std::string_view to_string(Branch b) noexcept;
std::string_view to_string(FilterCriterion f) noexcept;
std::string_view to_string(AdmittedBy a) noexcept;
std::string_view to_string(Preselect p) noexcept;
std::optional<FilterCriterion> parse_filter(std::string_view text) noexcept;
std::optional<Preselect> parse_preselect(std::string_view text) noexcept;

struct MappingResult {
  std::string threat_id;
  std::string domain_tag;
  std::string threat_title;
  std::string target_id;
  double similarity = 0;
  Branch branch = Branch::TCM;
  AdmittedBy admitted_by = AdmittedBy::threshold;

  bool operator==(const MappingResult&) const = default;
};

/// Raised under SFC when there is nothing to fall back to.
class EmptyCandidatePoolError : public Error {
 public:
  explicit EmptyCandidatePoolError(const std::string& threat_id)
      : Error("no mapping candidates for threat " + threat_id) {}
};

struct Candidate {
  std::string target_id;
  double similarity = 0;
};

/// Threshold + filter admission over scored candidates, shared by both branches.
/// HFC admits similarity >= threshold; SFC additionally admits the single best candidate
/// when none passes. Output is sorted by similarity descending, then target id (natural order).
std::vector<std::pair<Candidate, AdmittedBy>> admit(std::vector<Candidate> candidates, double threshold,
                                                    FilterCriterion filter, std::string_view threat_id);

struct MappingOptions {
  double threshold = 0.55;
  FilterCriterion filter = FilterCriterion::SFC;
  std::string domain_tag = "enterprise-attack";
  Preselect preselect = Preselect::psi;
};

/// The text compared against the threat for a technique: description followed by every
/// addendum, separated by blank lines.
std::string technique_text(const TechniqueEntry& technique);

/// Techniques of the preselected tactics against the threat summary.
/// Throws ValidationError when the preselection is empty.
std::vector<MappingResult> map_ttm(const ThreatDocument& document, const std::string& threat_title,
                                   const TacticCandidateSet& candidates, const AttackCorpus& attack,
                                   const MappingOptions& options, EmbeddingProvider& provider);

/// Non-deprecated CAPEC descriptions against the threat summary.
/// Throws ValidationError for an empty pattern corpus.
std::vector<MappingResult> map_tcm(const ThreatDocument& document, const std::string& threat_title,
                                   const CapecCorpus& patterns, const MappingOptions& options,
                                   EmbeddingProvider& provider);

/// "threat_id;domain;title;target_id;similarity"
std::string format_mapping_line(const MappingResult& result);
std::string format_similarity(double similarity);

}  // namespace orca
