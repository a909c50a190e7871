#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orca/semsim.hpp"

namespace orca {

/// A field that the threat source gives either as one string or as a list.
struct TextOrList {
  std::vector<std::string> values;
  bool is_list = false;

  bool operator==(const TextOrList&) const = default;
};

enum class Level { Low = 1, Medium = 2, High = 3 };

std::string_view to_string(Level level) noexcept;
std::optional<Level> parse_level(std::string_view text) noexcept;

struct ThreatRecord {
  std::string threat_id;
  std::string title;
  std::string description;
  std::string threat_agent;
  TextOrList vulnerabilities;
  TextOrList threatened_assets;
  TextOrList affected_components;
  // Optional qualitative rating carried into the score report.
  std::optional<Level> severity;
  std::optional<Level> likelihood;

  bool operator==(const ThreatRecord&) const = default;
};

struct ThreatDocument {
  std::string threat_id;
  std::string summary;
  std::optional<Embedding> embedding;
};

enum class ThreatFormat { json, csv };

std::optional<ThreatFormat> parse_threat_format(std::string_view text) noexcept;

/// JSON: an array of objects (or a single object) keyed "Threat ID", "Threat title",
/// "Threat Description", "Threat agent", "Vulnerability", "Threatened Asset",
/// "Affected Components"; optional "Severity" and "Likelihood".
/// CSV: header row with the same names; list cells split on ';'.
/// Throws ParseError on duplicate ids or missing title/description.
std::vector<ThreatRecord> parse_threats(std::string_view document, ThreatFormat format);

std::string serialize_threats(const std::vector<ThreatRecord>& records, ThreatFormat format);

/// "A Threat with the title <title> and the description <description>" with
/// whitespace-collapsed title and description. Embedding left unset.
ThreatDocument synthesize_summary(const ThreatRecord& record);

}  // namespace orca
