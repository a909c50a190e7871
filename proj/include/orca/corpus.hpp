#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orca/ids.hpp"
#include "orca/time.hpp"

namespace orca {

// ---------------------------------------------------------------------------
// CAPEC
// ---------------------------------------------------------------------------

struct AttackPattern {
  std::string capec_id;  // "CAPEC-<n>"
  std::string name;
  std::string description;
  std::vector<std::string> parent_of;    // resolved capec ids
  std::vector<std::string> can_precede;  // resolved capec ids
  std::vector<std::string> related_cwes; // "CWE-<n>"
  bool deprecated = false;

  bool operator==(const AttackPattern&) const = default;
};

/// A reference in the source bundle that did not resolve inside the same snapshot.
struct DanglingRef {
  std::string from;       // capec id holding the reference
  std::string attribute;  // "parent_of" or "can_precede"
  std::string target;     // raw STIX id

  bool operator==(const DanglingRef&) const = default;
};

class CapecCorpus {
 public:
  std::map<std::string, AttackPattern, IdLess> patterns;
  std::vector<DanglingRef> dangling;
  std::string snapshot_date;  // newest "modified" seen in the bundle, may be empty

  const AttackPattern* find(std::string_view capec_id) const;
  /// Throws LookupError when absent.
  const AttackPattern& lookup(std::string_view capec_id) const;
  std::size_t active_count() const;

  bool operator==(const CapecCorpus&) const = default;
};

/// Parses a CAPEC STIX 2.x bundle. Deprecated patterns are kept and flagged.
/// Throws ParseError (naming the object id) or EmptyCorpusError.
CapecCorpus load_capec(std::string_view stix_document);

// ---------------------------------------------------------------------------
// ATT&CK + FiGHT
// ---------------------------------------------------------------------------

struct TacticEntry {
  std::string tactic_id;  // "TA0001"
  std::string name;
  std::string description;
  std::string shortname;  // kill-chain phase name, e.g. "initial-access"

  bool operator==(const TacticEntry&) const = default;
};

struct TechniqueEntry {
  std::string technique_id;  // "T1078", "T1078.004"
  std::string name;
  std::string description;
  std::vector<std::string> tactic_ids;
  std::vector<std::string> capec_ids;
  std::vector<std::string> addenda;

  bool operator==(const TechniqueEntry&) const = default;
};

class AttackCorpus {
 public:
  std::map<std::string, TechniqueEntry, IdLess> techniques;
  std::map<std::string, TacticEntry, IdLess> tactics;
  std::string domain = "enterprise-attack";
  std::string snapshot_date;
  std::vector<std::string> warnings;

  const TechniqueEntry* find_technique(std::string_view id) const;
  const TacticEntry* find_tactic(std::string_view id) const;

  bool operator==(const AttackCorpus&) const = default;
};

/// Parses an ATT&CK STIX 2.x bundle. Revoked and deprecated techniques are dropped.
AttackCorpus load_attack(std::string_view stix_document);

struct FightReport {
  std::size_t total = 0;
  std::size_t excluded = 0;
  std::size_t enriched = 0;
  std::size_t addenda_added = 0;
  std::vector<std::string> excluded_ids;
  std::vector<std::string> warnings;
};

struct FightResult {
  AttackCorpus corpus;
  FightReport report;
};

/// Merges FiGHT addenda into the ATT&CK snapshot. FiGHT entries are matched to ATT&CK
/// only through an explicit cross-reference; entries without a match or without addenda
/// are excluded. ATT&CK techniques are never added or removed.
FightResult prepare_fight(std::string_view fight_yaml, AttackCorpus attack);

// ---------------------------------------------------------------------------
// NVD
// ---------------------------------------------------------------------------

enum class CvssVersion { v2, v3, v4 };

std::string_view to_string(CvssVersion v) noexcept;
std::optional<CvssVersion> parse_cvss_version(std::string_view text) noexcept;

struct BaseScoreMetrics {
  double impact = 0;
  double exploitability = 0;
  double base = 0;

  bool operator==(const BaseScoreMetrics&) const = default;
};

struct VulnerabilityRecord {
  std::string cve_id;
  std::vector<std::string> cwe_ids;
  Timestamp published{};
  std::optional<BaseScoreMetrics> cvss_v2;
  std::optional<BaseScoreMetrics> cvss_v3;
  std::optional<BaseScoreMetrics> cvss_v4;

  const std::optional<BaseScoreMetrics>& metrics(CvssVersion v) const noexcept;
  bool scoreable() const noexcept { return cvss_v2 || cvss_v3 || cvss_v4; }

  bool operator==(const VulnerabilityRecord&) const = default;
};

using CweIndex = std::map<std::string, std::set<std::string, IdLess>, IdLess>;

struct NvdStore {
  std::map<std::string, VulnerabilityRecord, IdLess> records;
  CweIndex index;
  std::size_t skipped = 0;  // malformed entries
  std::vector<std::string> warnings;
  std::string snapshot_date;

  const VulnerabilityRecord* find(std::string_view cve_id) const;
  std::size_t unscoreable_count() const;

  bool operator==(const NvdStore&) const = default;
};

/// Ingests NVD JSON feeds in order (1.1 "CVE_Items" or 2.0 "vulnerabilities" layout).
/// Later documents overwrite earlier records with the same id. Malformed entries are
/// skipped and counted; zero parseable entries overall is an error.
NvdStore load_nvd(std::span<const std::string> feed_documents);

/// Rebuilds the CWE→CVE index from the record set.
CweIndex build_cwe_index(const std::map<std::string, VulnerabilityRecord, IdLess>& records);

// ---------------------------------------------------------------------------
// On-disk cache
// ---------------------------------------------------------------------------

/// Bumped whenever a serialized layout changes.
inline constexpr unsigned char kCacheVersion = 1;

std::string serialize_cache(const CapecCorpus& corpus);
std::string serialize_cache(const AttackCorpus& corpus);
std::string serialize_cache(const NvdStore& store);

/// Throw StaleCacheError on version or kind mismatch, ParseError on corrupt payload.
CapecCorpus deserialize_capec_cache(std::string_view bytes);
AttackCorpus deserialize_attack_cache(std::string_view bytes);
NvdStore deserialize_nvd_cache(std::string_view bytes);

/// "<kind>-<first 16 hex of content hash>.orc"
std::string cache_file_name(std::string_view kind, std::string_view content_hash);

}  // namespace orca
