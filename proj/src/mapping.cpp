#include "orca/mapping.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "orca/ids.hpp"
#include "orca/util.hpp"

namespace orca {

std::string_view to_string(Branch b) noexcept { return b == Branch::TTM ? "TTM" : "TCM"; }
std::string_view to_string(FilterCriterion f) noexcept { return f == FilterCriterion::HFC ? "HFC" : "SFC"; }
std::string_view to_string(AdmittedBy a) noexcept { return a == AdmittedBy::threshold ? "threshold" : "soft_fallback"; }
std::string_view to_string(Preselect p) noexcept { return p == Preselect::psi ? "psi" : "xi"; }

std::optional<FilterCriterion> parse_filter(std::string_view text) noexcept {
  if (text == "HFC" || text == "hfc") return FilterCriterion::HFC;
  if (text == "SFC" || text == "sfc") return FilterCriterion::SFC;
  return std::nullopt;
}

std::optional<Preselect> parse_preselect(std::string_view text) noexcept {
  if (text == "psi") return Preselect::psi;
  if (text == "xi") return Preselect::xi;
  return std::nullopt;
}

std::vector<std::pair<Candidate, AdmittedBy>> admit(std::vector<Candidate> candidates, double threshold,
                                                    FilterCriterion filter, std::string_view threat_id) {
  if (candidates.empty()) {
    if (filter == FilterCriterion::SFC) throw EmptyCandidatePoolError(std::string(threat_id));
    return {};
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return natural_less(a.target_id, b.target_id);
  });
  std::vector<std::pair<Candidate, AdmittedBy>> out;
  for (const auto& c : candidates) {
    if (c.similarity < threshold) break;
    out.emplace_back(c, AdmittedBy::threshold);
  }
  if (out.empty() && filter == FilterCriterion::SFC) out.emplace_back(candidates.front(), AdmittedBy::soft_fallback);
  return out;
}

std::string technique_text(const TechniqueEntry& technique) {
  std::string text = technique.description.empty() ? technique.name : technique.description;
  for (const auto& addendum : technique.addenda) {
    text += "\n\n";
    text += addendum;
  }
  return text;
}

namespace {

std::vector<MappingResult> score_and_admit(const ThreatDocument& document, const std::string& threat_title,
                                           const std::vector<std::string>& ids, const std::vector<std::string>& texts,
                                           Branch branch, const MappingOptions& options, EmbeddingProvider& provider) {
  const Embedding doc = document.embedding ? *document.embedding : provider.embed(document.summary, document.threat_id);
  std::vector<Candidate> candidates;
  if (!texts.empty()) {
    const auto embeddings = provider.embed_batch(texts, ids);
    candidates.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) candidates.push_back({ids[i], cosine(doc, embeddings[i])});
  }
  std::vector<MappingResult> out;
  for (auto& [candidate, how] : admit(std::move(candidates), options.threshold, options.filter, document.threat_id))
    out.push_back({document.threat_id, options.domain_tag, threat_title, candidate.target_id, candidate.similarity, branch, how});
  return out;
}

void check_threshold(double threshold) {
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw ValidationError("threshold must lie in [-1, 1]");
}

}  // namespace

std::vector<MappingResult> map_ttm(const ThreatDocument& document, const std::string& threat_title,
                                   const TacticCandidateSet& candidates, const AttackCorpus& attack,
                                   const MappingOptions& options, EmbeddingProvider& provider) {
  check_threshold(options.threshold);
  TacticSet preselected;
  if (options.preselect == Preselect::psi)
    preselected = candidates.merged;
  else if (candidates.best)
    preselected.insert(*candidates.best);
  if (preselected.empty()) throw ValidationError("no preselected tactics for " + document.threat_id);

  std::vector<std::string> ids, texts;
  for (const auto& [id, technique] : attack.techniques) {
    const bool selected = std::any_of(technique.tactic_ids.begin(), technique.tactic_ids.end(),
                                      [&](const std::string& t) { return preselected.contains(t); });
    if (!selected) continue;
    ids.push_back(id);
    texts.push_back(technique_text(technique));
  }
  return score_and_admit(document, threat_title, ids, texts, Branch::TTM, options, provider);
}

std::vector<MappingResult> map_tcm(const ThreatDocument& document, const std::string& threat_title,
                                   const CapecCorpus& patterns, const MappingOptions& options,
                                   EmbeddingProvider& provider) {
  check_threshold(options.threshold);
  if (patterns.patterns.empty()) throw ValidationError("map_tcm: empty CAPEC corpus");
  std::vector<std::string> ids, texts;
  for (const auto& [id, pattern] : patterns.patterns) {
    if (pattern.deprecated) continue;
    // Some CAPEC entries carry no description; the name is the only text left.
    const std::string& text = pattern.description.empty() ? pattern.name : pattern.description;
    if (text.empty()) continue;
    ids.push_back(id);
    texts.push_back(text);
  }
  return score_and_admit(document, threat_title, ids, texts, Branch::TCM, options, provider);
}

std::string format_similarity(double similarity) {
  if (similarity == 0 || std::fabs(similarity) >= 0.1) return format_fixed(similarity, 7);
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.7g", similarity);
  return buf.data();
}

std::string format_mapping_line(const MappingResult& r) {
  std::string title = collapse_whitespace(r.threat_title);
  std::replace(title.begin(), title.end(), ';', ',');  // keep the five-field layout parseable
  return r.threat_id + ";" + r.domain_tag + ";" + title + ";" + r.target_id + ";" +
         format_similarity(r.similarity);
}

}  // namespace orca
