#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orca/corpus.hpp"
#include "orca/mapping.hpp"

namespace orca {

enum class ScanMode { Normal, Deep };

std::string_view to_string(ScanMode m) noexcept;
std::optional<ScanMode> parse_scan_mode(std::string_view text) noexcept;

struct ScanConfig {
  ScanMode mode = ScanMode::Normal;
  bool omega = false;  // drop repeated (threat, cve) rows
  Date tau = kDefaultTau;
  CvssVersion cvss_version = CvssVersion::v2;
};

using CapecSet = std::set<std::string, IdLess>;

/// Normal: the seeds. Deep: seeds, their transitive parent_of closure, and one hop of
/// can_precede from every member of that closure. Deprecated patterns are neither
/// followed nor added. Throws LookupError for a seed missing from the snapshot.
CapecSet expand_capecs(const CapecSet& seeds, const CapecCorpus& patterns, ScanMode mode);

struct ExtractionRow {
  std::string threat_id;
  std::string cve_id;
  std::string cwe_id;
  std::string capec_id;
  double impact = 0;
  double exploitability = 0;
  double base = 0;
  Timestamp published{};

  bool operator==(const ExtractionRow&) const = default;
};

struct ThreatExtractionStats {
  std::size_t capecs = 0;
  std::size_t cwes = 0;
  std::size_t rows = 0;
  std::size_t distinct_cves = 0;
  std::size_t before_tau = 0;     // paths dropped by τ
  std::size_t unscoreable = 0;    // paths whose CVE lacks the configured CVSS version
  std::size_t duplicates = 0;     // rows dropped by ω
};

struct ExtractionReport {
  std::map<std::string, ThreatExtractionStats> per_threat;
  std::vector<std::string> threats_without_rows;
  std::vector<std::string> warnings;
};

struct ExtractionResult {
  std::vector<ExtractionRow> rows;
  ExtractionReport report;
};

/// The CAPEC seeds a mapping contributes: the target itself for TCM, the technique's
/// CAPECs for TTM. Unknown or deprecated ids are skipped with a warning.
CapecSet seed_capecs(const MappingResult& mapping, const AttackCorpus& attack, const CapecCorpus& patterns,
                     std::vector<std::string>* warnings = nullptr);

/// Threat → CAPEC → CWE → CVE expansion. Threats appear in first-mapping order; within a
/// threat rows follow (capec, cwe, cve) natural order.
ExtractionResult extract_rows(std::span<const MappingResult> mappings, const AttackCorpus& attack,
                              const CapecCorpus& patterns, const NvdStore& store, const ScanConfig& config);

/// Column set: threat_id, cve_id, cwe_id, capec_id, <v>_impactScore,
/// <v>_exploitabilityScore, <v>_baseScore, published.
std::string extraction_csv(std::span<const ExtractionRow> rows, CvssVersion version);
std::vector<ExtractionRow> parse_extraction_csv(std::string_view csv);

std::string serialize_extraction_cache(std::span<const ExtractionRow> rows, CvssVersion version);
std::vector<ExtractionRow> deserialize_extraction_cache(std::string_view bytes, CvssVersion* version = nullptr);

}  // namespace orca
